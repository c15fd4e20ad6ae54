//! Command-line surface: one subcommand per library operation, text or JSON
//! out, deterministic byte-for-byte. Domain failures print the violated
//! invariant on one line and exit 1; argument problems exit 2.

use std::io::Write;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use itertools::Itertools;
use serde_json::json;

use crate::affine_weyl::{
    bruhat_leq, evaluate_word, greedy_reduced_word, parse_window, ReducedWord,
};
use crate::bott_samelson::{build_bs, count_bs_points, project_all};
use crate::circular::{pi_c, cable_word, CircularComplex};
use crate::cyclic_quiver::{component_permutations, orbit_permutation, QuiverRep};
use crate::error::Error;
use crate::field::{Field, Mat};
use crate::lattice::{enumerate_flag_points_with, MembershipMode};
use crate::lusztig_phi::{phi, phi_profile, verify_phi_cell, NilpotentMatrix};
use crate::wiring::{build_diagram, render, RenderFormat};

#[derive(Parser)]
#[command(name = "affsch", about = "Window arithmetic for affine permutations and their lattice varieties", disable_help_subcommand = true)]
struct Cli {
    /// Emit a single JSON document instead of plain text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Length of an affine permutation given by its window
    Len {
        #[arg(short)]
        n: usize,
        window: String,
    },
    /// Reduced word of a window, or with --eval the window of a word
    Word {
        #[arg(short)]
        n: usize,
        /// Treat the argument as a letter list and evaluate it
        #[arg(long)]
        eval: bool,
        /// Shift power prefixed to the letters (with --eval)
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        sigma: i64,
        arg: String,
    },
    /// Bruhat order test: is the first window below the second
    Bruhat {
        #[arg(short)]
        n: usize,
        p: String,
        q: String,
    },
    /// Wiring diagram of a window
    Wiring {
        #[arg(short)]
        n: usize,
        window: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Ascii)]
        format: FormatArg,
    },
    /// Jordan type and lattice profile of a nilpotent matrix
    Phi {
        /// Field size: 0 for rationals, or a prime
        #[arg(short, default_value_t = 0)]
        q: u64,
        /// Square matrix as a JSON array of rows
        #[arg(long)]
        matrix: String,
    },
    /// Orbit label of a nilpotent cyclic-quiver representation, or of a
    /// circular complex with --circular
    Psi {
        #[arg(short, default_value_t = 0)]
        q: u64,
        /// Dimension vector as a JSON array
        #[arg(long, requires = "maps", conflicts_with = "circular")]
        dims: Option<String>,
        /// Arrow matrices as a JSON array of row arrays, one per node
        #[arg(long, requires = "dims")]
        maps: Option<String>,
        /// Interpret the input as a two-map circular complex
        #[arg(long, requires = "x")]
        circular: bool,
        /// First map of the complex (rows b x a), JSON
        #[arg(short, long, requires = "y")]
        x: Option<String>,
        /// Second map of the complex (rows a x b), JSON
        #[arg(short, long, requires = "x")]
        y: Option<String>,
    },
    /// Rank table and string multiplicities of a quiver representation
    Ranks {
        #[arg(short, default_value_t = 0)]
        q: u64,
        #[arg(long)]
        dims: String,
        #[arg(long)]
        maps: String,
    },
    /// Component labels of the nilpotent representations with given dims
    Components {
        #[arg(long)]
        dims: String,
    },
    /// Component permutation of the rank-c stratum of circular complexes
    Pic {
        #[arg(short)]
        a: usize,
        #[arg(short)]
        b: usize,
        #[arg(short)]
        c: usize,
    },
    /// Cable word for the rank-c component permutation
    Cable {
        #[arg(short)]
        a: usize,
        #[arg(short)]
        b: usize,
        #[arg(short)]
        c: usize,
    },
    /// Count finite-field flags in the open or closed cell of a window
    Count {
        #[arg(short)]
        n: usize,
        window: String,
        #[arg(short)]
        q: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Variety)]
        mode: ModeArg,
        /// Flag composition as a JSON array (default: all ones)
        #[arg(long)]
        composition: Option<String>,
        /// Keep only flags transversal to the opposite chain at this offset
        #[arg(long, allow_hyphen_values = true)]
        opposite: Option<i64>,
    },
    /// Point count of the tower over a reduced word, with optional projection
    Bs {
        #[arg(short)]
        n: usize,
        /// Letter list as a JSON array
        #[arg(long)]
        letters: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        sigma: i64,
        #[arg(short)]
        q: u64,
        /// Also report the number of distinct projected flags
        #[arg(long)]
        project: bool,
        /// Composition for the projection (default: all ones)
        #[arg(long, requires = "project")]
        composition: Option<String>,
        #[arg(long, requires = "project", allow_hyphen_values = true)]
        opposite: Option<i64>,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum FormatArg {
    Ascii,
    Svg,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ModeArg {
    Cell,
    Variety,
}

impl From<ModeArg> for MembershipMode {
    fn from(m: ModeArg) -> MembershipMode {
        match m {
            ModeArg::Cell => MembershipMode::Cell,
            ModeArg::Variety => MembershipMode::Variety,
        }
    }
}

/// Runs the tool on an argv slice (argv[0] is the program name), writing
/// results to `out` and failures to `err`. Returns the process exit code.
pub fn run(argv: &[String], out: &mut impl Write, err: &mut impl Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = write!(out, "{e}");
                return 0;
            }
            _ => {
                let _ = write!(err, "{e}");
                return 2;
            }
        },
    };
    match dispatch(&cli.cmd, cli.json, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            1
        }
    }
}

fn bracketed<T: std::fmt::Display>(items: &[T]) -> String {
    format!("[{}]", items.iter().join(","))
}

macro_rules! parse_json {
    ($ty:ty, $text:expr, $what:expr) => {
        serde_json::from_str::<$ty>($text)
            .map_err(|e| Error::BadInput(format!("{}: {e}", $what)))
    };
}

fn parse_list(text: &str, what: &str) -> Result<Vec<usize>, Error> {
    parse_json!(Vec<usize>, text, what)
}

fn parse_matrix(text: &str, what: &str, field: Field) -> Result<Mat, Error> {
    let rows = parse_json!(Vec<Vec<i64>>, text, what)?;
    Mat::from_i64(field, &rows)
}

fn emit(out: &mut impl Write, json: bool, doc: serde_json::Value, plain: String) {
    if json {
        let _ = writeln!(out, "{doc}");
    } else {
        let _ = writeln!(out, "{plain}");
    }
}

fn dispatch(cmd: &Cmd, json: bool, out: &mut impl Write) -> Result<(), Error> {
    match cmd {
        Cmd::Len { n, window } => {
            let p = parse_window(window, *n)?;
            let len = p.length();
            emit(
                out,
                json,
                json!({"n": n, "window": p.window(), "len": len}),
                format!("{len}"),
            );
        }
        Cmd::Word {
            n,
            eval,
            sigma,
            arg,
        } => {
            if *eval {
                let letters = parse_list(arg, "letters")?;
                let w = ReducedWord::new(*n, *sigma, letters)?;
                let p = evaluate_word(&w)?;
                emit(
                    out,
                    json,
                    json!({"n": n, "window": p.window(), "len": p.length()}),
                    bracketed(p.window()),
                );
            } else {
                let p = parse_window(arg, *n)?;
                let w = greedy_reduced_word(&p);
                emit(
                    out,
                    json,
                    json!({"n": n, "sigma_power": w.sigma_power, "letters": w.letters}),
                    format!(
                        "sigma_power={} letters={}",
                        w.sigma_power,
                        bracketed(&w.letters)
                    ),
                );
            }
        }
        Cmd::Bruhat { n, p, q } => {
            let lhs = parse_window(p, *n)?;
            let rhs = parse_window(q, *n)?;
            let leq = bruhat_leq(&lhs, &rhs)?;
            emit(out, json, json!({"leq": leq}), format!("{leq}"));
        }
        Cmd::Wiring { n, window, format } => {
            let p = parse_window(window, *n)?;
            let d = build_diagram(&p)?;
            let rendered = render(
                &d,
                match format {
                    FormatArg::Ascii => RenderFormat::Ascii,
                    FormatArg::Svg => RenderFormat::Svg,
                },
            );
            let name = match format {
                FormatArg::Ascii => "ascii",
                FormatArg::Svg => "svg",
            };
            emit(
                out,
                json,
                json!({"format": name, "len": p.length(), "render": rendered}),
                rendered.trim_end_matches('\n').to_string(),
            );
        }
        Cmd::Phi { q, matrix } => {
            let field = Field::from_q(*q)?;
            let mat = parse_matrix(matrix, "matrix", field)?;
            let nil = NilpotentMatrix::new(mat)?;
            let jordan = nil.jordan_type();
            let profile = phi_profile(&phi(&nil)?)?;
            let consistent = verify_phi_cell(&nil)?;
            emit(
                out,
                json,
                json!({"jordan": jordan, "profile": profile, "consistent": consistent}),
                format!(
                    "jordan={} profile={} consistent={consistent}",
                    bracketed(&jordan),
                    bracketed(&profile)
                ),
            );
        }
        Cmd::Psi {
            q,
            dims,
            maps,
            circular,
            x,
            y,
        } => {
            let field = Field::from_q(*q)?;
            if *circular {
                let xm = parse_matrix(x.as_deref().unwrap(), "x", field)?;
                let ym = parse_matrix(y.as_deref().unwrap(), "y", field)?;
                let cx = CircularComplex::new(xm, ym)?;
                let (rx, ry) = cx.orbit_ranks();
                let open = cx.is_open();
                let component = if open {
                    Some(pi_c(cx.a(), cx.b(), rx)?)
                } else {
                    None
                };
                let plain = match &component {
                    Some(p) => format!(
                        "ranks=({rx},{ry}) open={open} component={}",
                        bracketed(p.window())
                    ),
                    None => format!("ranks=({rx},{ry}) open={open}"),
                };
                emit(
                    out,
                    json,
                    json!({
                        "rank_x": rx,
                        "rank_y": ry,
                        "open": open,
                        "component": component.as_ref().map(|p| p.window().to_vec()),
                    }),
                    plain,
                );
            } else {
                let (dims, maps) = match (dims, maps) {
                    (Some(d), Some(m)) => (d, m),
                    _ => {
                        return Err(Error::BadInput(
                            "psi needs --dims with --maps, or --circular with -x and -y".into(),
                        ))
                    }
                };
                let rep = parse_rep(dims, maps, field)?;
                let label = orbit_permutation(&rep)?;
                emit(
                    out,
                    json,
                    json!({"window": label.window()}),
                    bracketed(label.window()),
                );
            }
        }
        Cmd::Ranks { q, dims, maps } => {
            let field = Field::from_q(*q)?;
            let rep = parse_rep(dims, maps, field)?;
            let table = rep.rank_table();
            let mult = rep.multiplicities()?;
            if json {
                let _ = writeln!(
                    out,
                    "{}",
                    json!({"table": table, "multiplicities": mult})
                );
            } else {
                for (j, row) in table.iter().enumerate() {
                    let _ = writeln!(out, "r[{}]={}", j + 1, bracketed(row));
                }
                for (j, row) in mult.iter().enumerate() {
                    let _ = writeln!(out, "m[{}]={}", j + 1, bracketed(row));
                }
            }
        }
        Cmd::Components { dims } => {
            let d = parse_list(dims, "dims")?;
            let labels = component_permutations(&d)?;
            if json {
                let windows: Vec<Vec<i64>> =
                    labels.iter().map(|p| p.window().to_vec()).collect();
                let _ = writeln!(out, "{}", json!({"windows": windows}));
            } else {
                for p in &labels {
                    let _ = writeln!(out, "{}", bracketed(p.window()));
                }
            }
        }
        Cmd::Pic { a, b, c } => {
            let p = pi_c(*a, *b, *c)?;
            let len = p.length();
            emit(
                out,
                json,
                json!({"window": p.window(), "len": len}),
                format!("{}\nlen={len}", bracketed(p.window())),
            );
        }
        Cmd::Cable { a, b, c } => {
            let w = cable_word(*a, *b, *c)?;
            emit(
                out,
                json,
                json!({"sigma_power": w.sigma_power, "letters": w.letters}),
                format!(
                    "sigma_power={} letters={}",
                    w.sigma_power,
                    bracketed(&w.letters)
                ),
            );
        }
        Cmd::Count {
            n,
            window,
            q,
            mode,
            composition,
            opposite,
        } => {
            let p = parse_window(window, *n)?;
            let comp = match composition {
                Some(text) => parse_list(text, "composition")?,
                None => vec![1usize; *n],
            };
            let count =
                enumerate_flag_points_with(&p, &comp, *q, (*mode).into(), *opposite)?;
            emit(out, json, json!({"count": count}), format!("{count}"));
        }
        Cmd::Bs {
            n,
            letters,
            sigma,
            q,
            project,
            composition,
            opposite,
        } => {
            let letters = parse_list(letters, "letters")?;
            let word = ReducedWord::new(*n, *sigma, letters)?;
            let d = build_bs(&word)?;
            let points = count_bs_points(&d, *q)?;
            let image = if *project {
                let comp = match composition {
                    Some(text) => parse_list(text, "composition")?,
                    None => vec![1usize; *n],
                };
                let flags = project_all(&d, *q, &comp, *opposite)?;
                let distinct: std::collections::HashSet<_> = flags.into_iter().collect();
                Some(distinct.len() as u64)
            } else {
                None
            };
            let plain = match image {
                Some(im) => format!("points={points} image={im}"),
                None => format!("points={points}"),
            };
            emit(out, json, json!({"points": points, "image": image}), plain);
        }
    }
    Ok(())
}

fn parse_rep(dims: &str, maps: &str, field: Field) -> Result<QuiverRep, Error> {
    let dims = parse_list(dims, "dims")?;
    let raw = parse_json!(Vec<Vec<Vec<i64>>>, maps, "maps")?;
    let mut mats = Vec::with_capacity(raw.len());
    for rows in &raw {
        mats.push(Mat::from_i64(field, rows)?);
    }
    QuiverRep::new(dims, mats)
}
