//! Cylindrical wiring diagrams for window permutations.
//!
//! A diagram presents p on a horizontal strip whose top and bottom borders
//! are identified. Track r sits at height r (track 1 lowest); wire w enters
//! at track w on the right edge and leaves at the track of its residue on
//! the left edge, winding around the cylinder as many times as its
//! translation coordinate. Events are laid out left to right: first the
//! rotation wraps, then one crossing per letter of a reduced word.

use crate::affine_weyl::{greedy_reduced_word, AffinePermutation, ReducedWord};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    /// Crossing of tracks (l, l+1) for letter l >= 1, or of the extreme
    /// tracks (n, 1) across the border for letter 0.
    Crossing { letter: usize },
    /// Whole-strip rotation by one track; dir +1 shifts wires down going
    /// rightward, dir -1 shifts them up.
    Wrap { dir: i8 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireRecord {
    /// Right-edge track, which names the wire.
    pub start: usize,
    /// Left-edge track.
    pub end: usize,
    /// Signed number of border passages.
    pub winding: i64,
}

#[derive(Clone, Debug)]
pub struct WiringDiagram {
    pub n: usize,
    pub p: AffinePermutation,
    pub word: ReducedWord,
    pub events: Vec<Event>,
    pub wires: Vec<WireRecord>,
    /// Left-to-right crossing list: (event index, involved wires sorted).
    pub crossings: Vec<(usize, (usize, usize))>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    Svg,
}

pub fn build_diagram(p: &AffinePermutation) -> Result<WiringDiagram> {
    let n = p.n();
    let word = greedy_reduced_word(p);
    let mut events = Vec::new();
    let dir: i8 = if word.sigma_power >= 0 { 1 } else { -1 };
    for _ in 0..word.sigma_power.unsigned_abs() {
        events.push(Event::Wrap { dir });
    }
    for &l in &word.letters {
        events.push(Event::Crossing { letter: l });
    }

    let (bar, c) = p.decompose();
    // occ[r] = wire currently occupying track r (index 0 unused)
    let mut occ = vec![0usize; n + 1];
    for w in 1..=n {
        occ[bar.apply(w as i64) as usize] = w;
    }
    let mut winding = vec![0i64; n + 1];
    let mut crossings = Vec::new();
    for (ev_idx, ev) in events.iter().enumerate() {
        match ev {
            Event::Crossing { letter: 0 } => {
                // wire at track n dives to track 1 over the top border, wire
                // at track 1 climbs to track n through the bottom border
                winding[occ[n]] -= 1;
                winding[occ[1]] += 1;
                occ.swap(1, n);
                let pair = sorted_pair(occ[1], occ[n]);
                crossings.push((ev_idx, pair));
            }
            Event::Crossing { letter: l } => {
                occ.swap(*l, *l + 1);
                let pair = sorted_pair(occ[*l], occ[*l + 1]);
                crossings.push((ev_idx, pair));
            }
            Event::Wrap { dir: 1 } => {
                let tmp = occ[1];
                for r in 1..n {
                    occ[r] = occ[r + 1];
                }
                occ[n] = tmp;
                winding[tmp] += 1;
            }
            Event::Wrap { .. } => {
                let tmp = occ[n];
                for r in (1..n).rev() {
                    occ[r + 1] = occ[r];
                }
                occ[1] = tmp;
                winding[tmp] -= 1;
            }
        }
    }
    // the forward sweep must land on the straight-through configuration and
    // reproduce the translation coordinates
    for r in 1..=n {
        debug_assert_eq!(occ[r], r);
        debug_assert_eq!(winding[r], c.c[r - 1]);
    }
    let wires = (1..=n)
        .map(|w| WireRecord { start: w, end: bar.apply(w as i64) as usize, winding: winding[w] })
        .collect();
    Ok(WiringDiagram { n, p: p.clone(), word, events, wires, crossings })
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn render(d: &WiringDiagram, format: RenderFormat) -> String {
    match format {
        RenderFormat::Ascii => render_ascii(d),
        RenderFormat::Svg => render_svg(d),
    }
}

/// Track r's character row; track n on top, borders at rows 0 and 2n+2.
fn ascii_row(n: usize, r: usize) -> usize {
    2 * (n - r) + 2
}

fn render_ascii(d: &WiringDiagram) -> String {
    let n = d.n;
    let ncols = d.events.len().max(1);
    let label_w = n.to_string().len() + 1;
    let width = label_w + 5 * ncols + label_w;
    let height = 2 * n + 3;
    let mut grid = vec![vec![' '; width]; height];
    grid[0].fill('=');
    grid[height - 1].fill('=');
    for r in 1..=n {
        grid[ascii_row(n, r)][label_w..(width - label_w)].fill('-');
    }

    // occ, rebuilt forward as in build_diagram, drives the labels
    let (bar, _) = d.p.decompose();
    for (ev_idx, ev) in d.events.iter().enumerate() {
        let x0 = label_w + 5 * ev_idx;
        match ev {
            Event::Crossing { letter: 0 } => {
                let top = ascii_row(n, n);
                let bot = ascii_row(n, 1);
                grid[0][x0 + 2] = 'X';
                grid[1][x0 + 1] = '|';
                grid[1][x0 + 3] = '|';
                let row = &mut grid[top];
                row[x0 + 1] = '/';
                row[x0 + 2] = ' ';
                row[x0 + 3] = '\\';
                let row = &mut grid[bot];
                row[x0 + 1] = '\\';
                row[x0 + 2] = ' ';
                row[x0 + 3] = '/';
                grid[height - 2][x0 + 1] = '|';
                grid[height - 2][x0 + 3] = '|';
                grid[height - 1][x0 + 2] = '|';
            }
            Event::Crossing { letter: l } => {
                let upper = ascii_row(n, l + 1);
                let row = &mut grid[upper];
                row[x0 + 1] = '\\';
                row[x0 + 2] = ' ';
                row[x0 + 3] = '/';
                grid[upper + 1][x0 + 2] = 'X';
                let row = &mut grid[upper + 2];
                row[x0 + 1] = '/';
                row[x0 + 2] = ' ';
                row[x0 + 3] = '\\';
            }
            Event::Wrap { dir } => {
                let diag = if *dir == 1 { '\\' } else { '/' };
                for r in 1..=n {
                    let row = &mut grid[ascii_row(n, r)];
                    row[x0 + 1] = diag;
                    row[x0 + 2] = ' ';
                    row[x0 + 3] = diag;
                }
                for r in 1..n {
                    // between tracks r and r+1
                    grid[ascii_row(n, r) - 1][x0 + 2] = diag;
                }
                grid[0][x0 + 2] = '|';
                grid[1][x0 + 2] = '|';
                grid[height - 2][x0 + 2] = '|';
                grid[height - 1][x0 + 2] = '|';
            }
        }
    }

    for w in 1..=n {
        let left_track = bar.apply(w as i64) as usize;
        let lab = w.to_string();
        let row = ascii_row(n, left_track);
        for (i, ch) in lab.chars().enumerate() {
            if i < label_w {
                grid[row][i] = ch;
            }
        }
        let row = ascii_row(n, w);
        let start = width - lab.len();
        for (i, ch) in lab.chars().enumerate() {
            grid[row][start + i] = ch;
        }
    }

    let mut out = String::new();
    for row in grid {
        let line: String = row.into_iter().collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

const COL_W: i64 = 40;
const TRACK_H: i64 = 30;
const MARGIN_X: i64 = 30;
const EDGE_PAD: i64 = 20;

fn svg_y(n: usize, r: usize) -> i64 {
    EDGE_PAD + TRACK_H * (n - r) as i64
}

fn svg_height(n: usize) -> i64 {
    EDGE_PAD * 2 + TRACK_H * (n as i64 - 1)
}

#[allow(clippy::needless_range_loop)] // wire numbers are 1-based labels, not slice indices
fn render_svg(d: &WiringDiagram) -> String {
    let n = d.n;
    let ncols = d.events.len().max(1) as i64;
    let x_left = MARGIN_X;
    let x_right = MARGIN_X + COL_W * ncols;
    let h = svg_height(n);
    let total_w = x_right + MARGIN_X;

    let (bar, _) = d.p.decompose();
    let mut occ = vec![0usize; n + 1];
    for w in 1..=n {
        occ[bar.apply(w as i64) as usize] = w;
    }
    // paths[w]: polyline points, built left to right
    let mut paths: Vec<Vec<(i64, i64)>> = (0..=n).map(|_| Vec::new()).collect();
    for w in 1..=n {
        let tr = bar.apply(w as i64) as usize;
        paths[w].push((x_left - EDGE_PAD, svg_y(n, tr)));
    }
    for (ev_idx, ev) in d.events.iter().enumerate() {
        let x0 = MARGIN_X + COL_W * ev_idx as i64;
        let x1 = x0 + COL_W;
        match ev {
            Event::Crossing { letter: 0 } => {
                let a = occ[n]; // top border passage, reappears at track 1
                let b = occ[1]; // bottom border passage, reappears at track n
                paths[a].push((x0, svg_y(n, n)));
                paths[a].push((x0 + 15, 0));
                paths[a].push((x0 + 15, h));
                paths[a].push((x1, svg_y(n, 1)));
                paths[b].push((x0, svg_y(n, 1)));
                paths[b].push((x0 + 25, h));
                paths[b].push((x0 + 25, 0));
                paths[b].push((x1, svg_y(n, n)));
                occ.swap(1, n);
            }
            Event::Crossing { letter: l } => {
                let a = occ[*l];
                let b = occ[*l + 1];
                paths[a].push((x0, svg_y(n, *l)));
                paths[a].push((x1, svg_y(n, *l + 1)));
                paths[b].push((x0, svg_y(n, *l + 1)));
                paths[b].push((x1, svg_y(n, *l)));
                occ.swap(*l, *l + 1);
            }
            Event::Wrap { dir: 1 } => {
                // every wire drops one track; the track 1 wire passes the
                // bottom border and reappears on top
                let wrapper = occ[1];
                paths[wrapper].push((x0, svg_y(n, 1)));
                paths[wrapper].push((x0 + 20, h));
                paths[wrapper].push((x0 + 20, 0));
                paths[wrapper].push((x1, svg_y(n, n)));
                for r in 2..=n {
                    let w = occ[r];
                    paths[w].push((x0, svg_y(n, r)));
                    paths[w].push((x1, svg_y(n, r - 1)));
                }
                let tmp = occ[1];
                for r in 1..n {
                    occ[r] = occ[r + 1];
                }
                occ[n] = tmp;
            }
            Event::Wrap { .. } => {
                let wrapper = occ[n];
                paths[wrapper].push((x0, svg_y(n, n)));
                paths[wrapper].push((x0 + 20, 0));
                paths[wrapper].push((x0 + 20, h));
                paths[wrapper].push((x1, svg_y(n, 1)));
                for r in 1..n {
                    let w = occ[r];
                    paths[w].push((x0, svg_y(n, r)));
                    paths[w].push((x1, svg_y(n, r + 1)));
                }
                let tmp = occ[n];
                for r in (1..n).rev() {
                    occ[r + 1] = occ[r];
                }
                occ[1] = tmp;
            }
        }
    }
    for w in 1..=n {
        paths[w].push((x_right + EDGE_PAD, svg_y(n, w)));
    }

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w}\" height=\"{}\" viewBox=\"0 0 {total_w} {}\">\n",
        h + 14,
        h + 14
    ));
    out.push_str(&format!(
        "<line x1=\"0\" y1=\"0\" x2=\"{total_w}\" y2=\"0\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"0\" y1=\"{h}\" x2=\"{total_w}\" y2=\"{h}\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n"
    ));
    for w in 1..=n {
        let pts: Vec<String> = paths[w].iter().map(|(x, y)| format!("{x},{y}")).collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#000\" stroke-width=\"2\"/>\n",
            pts.join(" ")
        ));
    }
    for w in 1..=n {
        let tr = bar.apply(w as i64) as usize;
        out.push_str(&format!(
            "<text x=\"4\" y=\"{}\" font-size=\"12\">{w}</text>\n",
            svg_y(n, tr) + 4
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{w}</text>\n",
            x_right + EDGE_PAD + 4,
            svg_y(n, w) + 4
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Recount crossings from rendered SVG geometry: parse the polylines, drop
/// the full-height border jumps, and count proper pairwise intersections of
/// the remaining segments with exact integer arithmetic.
pub fn svg_crossing_count(svg: &str) -> usize {
    let mut polylines: Vec<Vec<(i64, i64)>> = Vec::new();
    let mut rest = svg;
    while let Some(pos) = rest.find("points=\"") {
        rest = &rest[pos + 8..];
        let end = rest.find('"').unwrap_or(rest.len());
        let body = &rest[..end];
        let pts: Vec<(i64, i64)> = body
            .split_whitespace()
            .filter_map(|pair| {
                let (x, y) = pair.split_once(',')?;
                Some((x.parse().ok()?, y.parse().ok()?))
            })
            .collect();
        polylines.push(pts);
        rest = &rest[end..];
    }
    let full_height = polylines
        .iter()
        .flatten()
        .map(|&(_, y)| y)
        .max()
        .unwrap_or(0);
    type Seg = (usize, (i64, i64), (i64, i64)); // wire id with segment endpoints
    let mut segs: Vec<Seg> = Vec::new();
    for (id, pts) in polylines.iter().enumerate() {
        for win in pts.windows(2) {
            let (a, b) = (win[0], win[1]);
            if a.0 == b.0 && (a.1 - b.1).abs() == full_height {
                continue; // border jump, not drawn on the cylinder
            }
            segs.push((id, a, b));
        }
    }
    let mut count = 0usize;
    for i in 0..segs.len() {
        for j in (i + 1)..segs.len() {
            if segs[i].0 == segs[j].0 {
                continue;
            }
            if proper_cross(segs[i].1, segs[i].2, segs[j].1, segs[j].2) {
                count += 1;
            }
        }
    }
    count
}

fn orient(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> i64 {
    let v = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    v.signum()
}

fn proper_cross(a: (i64, i64), b: (i64, i64), c: (i64, i64), d: (i64, i64)) -> bool {
    orient(a, b, c) * orient(a, b, d) < 0 && orient(c, d, a) * orient(c, d, b) < 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_weyl::{evaluate_word, parse_window, AffinePermutation, TranslationVector};
    use crate::sample::{random_affine, Rng64};

    fn ap(w: &[i64]) -> AffinePermutation {
        AffinePermutation::new(w.to_vec()).unwrap()
    }

    #[test]
    fn crossing_count_equals_length() {
        for w in [
            vec![-2i64, 2, 6],
            vec![4, 2, 0],
            vec![1, 2, 3],
            vec![2, 3, 1, 4],
            vec![0, 2, 4],
        ] {
            let p = ap(&w);
            let d = build_diagram(&p).unwrap();
            assert_eq!(d.crossings.len() as u64, p.length());
        }
    }

    #[test]
    fn wire_records_match_group_data() {
        let p = ap(&[4, 2, 0]);
        let d = build_diagram(&p).unwrap();
        let (bar, c) = p.decompose();
        for rec in &d.wires {
            assert_eq!(rec.end, bar.apply(rec.start as i64) as usize);
            assert_eq!(rec.winding, c.c[rec.start - 1]);
        }
    }

    #[test]
    fn word_from_crossings_evaluates_back() {
        let mut rng = Rng64::new(0x5eed_0003);
        for trial in 0..60 {
            let n = 2 + (trial % 5) as usize;
            let p = random_affine(&mut rng, n, 2);
            let d = build_diagram(&p).unwrap();
            let letters: Vec<usize> = d
                .events
                .iter()
                .filter_map(|e| match e {
                    Event::Crossing { letter } => Some(*letter),
                    _ => None,
                })
                .collect();
            let word = ReducedWord::new(n, d.word.sigma_power, letters).unwrap();
            assert_eq!(evaluate_word(&word).unwrap(), p);
        }
    }

    #[test]
    fn ascii_example_has_four_crossing_glyphs() {
        let p = parse_window("[-2,2,6]", 3).unwrap();
        let d = build_diagram(&p).unwrap();
        let art = render(&d, RenderFormat::Ascii);
        assert_eq!(art.matches('X').count(), 4);
        let lines: Vec<&str> = art.lines().collect();
        assert_eq!(lines.len(), 2 * 3 + 3);
        assert!(lines[0].starts_with('='));
    }

    #[test]
    fn ascii_identity_and_rotation() {
        let d = build_diagram(&AffinePermutation::identity(3)).unwrap();
        let art = render(&d, RenderFormat::Ascii);
        assert_eq!(art.matches('X').count(), 0);
        let d = build_diagram(&AffinePermutation::sigma(3)).unwrap();
        let art = render(&d, RenderFormat::Ascii);
        assert_eq!(art.matches('X').count(), 0);
        assert!(art.contains('\\'));
    }

    #[test]
    fn svg_parse_back_counts_crossings() {
        let mut rng = Rng64::new(0x5eed_0004);
        for trial in 0..40 {
            let n = 2 + (trial % 4) as usize;
            let p = random_affine(&mut rng, n, 1);
            let d = build_diagram(&p).unwrap();
            let svg = render(&d, RenderFormat::Svg);
            assert_eq!(svg_crossing_count(&svg) as u64, p.length(), "p = {p}");
        }
    }

    #[test]
    fn svg_parse_back_margin_and_wrap_cases() {
        // pure margin crossing
        let s0 = AffinePermutation::simple_reflection(3, 0).unwrap();
        let svg = render(&build_diagram(&s0).unwrap(), RenderFormat::Svg);
        assert_eq!(svg_crossing_count(&svg), 1);
        // pure wraps contribute none
        let svg = render(
            &build_diagram(&AffinePermutation::sigma_pow(4, -2)).unwrap(),
            RenderFormat::Svg,
        );
        assert_eq!(svg_crossing_count(&svg), 0);
        // long translation
        let t = AffinePermutation::translation(&TranslationVector::new(vec![2, 0, -2]));
        let svg = render(&build_diagram(&t).unwrap(), RenderFormat::Svg);
        assert_eq!(svg_crossing_count(&svg) as u64, t.length());
    }

    #[test]
    fn renders_are_deterministic() {
        let p = ap(&[-2, 2, 6]);
        let d1 = build_diagram(&p).unwrap();
        let d2 = build_diagram(&p).unwrap();
        assert_eq!(render(&d1, RenderFormat::Ascii), render(&d2, RenderFormat::Ascii));
        assert_eq!(render(&d1, RenderFormat::Svg), render(&d2, RenderFormat::Svg));
    }
}
