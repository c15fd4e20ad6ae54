//! Nilpotent representations of the cyclic quiver and their lattice flags.
//!
//! A representation places a vector space V_j at each of h cyclically ordered
//! nodes and a map M_j : V_j -> V_{j-1} on each arrow (indices mod h, so M_1
//! lands in V_h). It is nilpotent when the composite around the full cycle
//! is. Nilpotent representations decompose into string modules I_j^k: a
//! basis v_0, ..., v_k with v_i at node j - i, each map sending v_i to
//! v_{i+1} and v_k to zero.
//!
//! The rank table r_j^e = rank(M_{j-e+1} ... M_j) determines the string
//! multiplicities by inclusion-exclusion, and conversely. The same data
//! drives two geometric constructions: a periodic lattice flag built from
//! stacked composite columns, and the affine permutation whose cell contains
//! that flag.

use std::collections::BTreeSet;

use crate::affine_weyl::{
    min_double_coset_rep, parabolic_bruhat_leq, AffinePermutation,
};
use crate::error::{Error, Result};
use crate::field::{Field, Mat, Scalar};
use crate::lattice::{LatticeFlag, LatticeWindow};
use crate::sample::Rng64;
use itertools::Itertools;

/// A representation of the cyclic quiver with h nodes. maps[j-1] is
/// M_j : V_j -> V_{j-1}, a dims[j-2] x dims[j-1] matrix (indices mod h).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuiverRep {
    dims: Vec<usize>,
    maps: Vec<Mat>,
    field: Field,
    // r_j^e = rank of the composite of e consecutive maps ending at M_j,
    // stored as ranks[j-1][e] for e = 0..=(h * n + 2)
    ranks: Vec<Vec<usize>>,
}

fn node(h: usize, x: i64) -> usize {
    (x - 1).rem_euclid(h as i64) as usize + 1
}

impl QuiverRep {
    pub fn new(dims: Vec<usize>, maps: Vec<Mat>) -> Result<QuiverRep> {
        let h = dims.len();
        if h == 0 || maps.len() != h {
            return Err(Error::ArityMismatch {
                expected: h.max(1),
                got: maps.len(),
            });
        }
        let field = maps[0].field;
        for j in 1..=h {
            let m = &maps[j - 1];
            if m.field != field {
                return Err(Error::FieldMismatch(
                    "all maps must live over one field".into(),
                ));
            }
            let src = dims[j - 1];
            let dst = dims[node(h, j as i64 - 1) - 1];
            if m.nr != dst || m.nc != src {
                return Err(Error::ShapeMismatch(format!(
                    "map {j} must be {dst}x{src}, got {}x{}",
                    m.nr, m.nc
                )));
            }
        }
        let n: usize = dims.iter().sum();
        let mut ranks = Vec::with_capacity(h);
        for j in 1..=h {
            let mut row = Vec::with_capacity(h * n + 3);
            let mut t = Mat::identity(field, dims[j - 1]);
            row.push(dims[j - 1]);
            for e in 1..=(h * n + 2) {
                let next_map = &maps[node(h, j as i64 - e as i64 + 1) - 1];
                t = next_map.mul(&t);
                row.push(t.rank());
            }
            ranks.push(row);
        }
        if n > 0 && ranks.iter().any(|row| row[h * n] != 0) {
            return Err(Error::NotNilpotent(
                "the composite around the cycle does not vanish".into(),
            ));
        }
        Ok(QuiverRep {
            dims,
            maps,
            field,
            ranks,
        })
    }

    pub fn h(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn map(&self, j: usize) -> &Mat {
        &self.maps[j - 1]
    }

    /// The composite of e consecutive maps ending at M_j.
    pub fn composite(&self, j: usize, e: usize) -> Mat {
        let h = self.h();
        let mut t = Mat::identity(self.field, self.dims[j - 1]);
        for s in 0..e {
            let m = &self.maps[node(h, j as i64 - s as i64) - 1];
            t = m.mul(&t);
        }
        t
    }

    /// r_j^e for j = 1..h; zero beyond the stored range.
    pub fn rank(&self, j: usize, e: i64) -> usize {
        if e < 0 {
            // a composite of negatively many maps is read as the identity
            return self.dims[j - 1];
        }
        *self.ranks[j - 1].get(e as usize).unwrap_or(&0)
    }

    pub fn rank_table(&self) -> Vec<Vec<usize>> {
        self.ranks.clone()
    }

    /// Multiplicity of each string module I_j^k in the decomposition:
    /// m_j^k = r_j^k - r_j^{k+1} - r_{j+1}^{k+1} + r_{j+1}^{k+2}, where j+1
    /// wraps around the cycle. Entries are indexed [j-1][k] for k = 0..n.
    /// A negative value means the input table cannot come from an actual
    /// representation and is reported as an error.
    pub fn multiplicities(&self) -> Result<Vec<Vec<usize>>> {
        multiplicities_of(self.h(), self.total_dim(), &|j, e| self.rank(j, e))
    }

    /// The same representation with all node labels advanced by one.
    pub fn rotate(&self) -> QuiverRep {
        let h = self.h();
        let dims: Vec<usize> = (1..=h)
            .map(|nu| self.dims[node(h, nu as i64 - 1) - 1])
            .collect();
        let maps: Vec<Mat> = (1..=h)
            .map(|nu| self.maps[node(h, nu as i64 - 1) - 1].clone())
            .collect();
        QuiverRep::new(dims, maps).expect("rotation preserves validity")
    }
}

fn multiplicities_of(
    h: usize,
    n: usize,
    rank: &dyn Fn(usize, i64) -> usize,
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(h);
    for j in 1..=h {
        let jn = node(h, j as i64 + 1);
        let mut row = Vec::with_capacity(n + 1);
        for k in 0..=n as i64 {
            let value = rank(j, k) as i64 - rank(j, k + 1) as i64 - rank(jn, k + 1) as i64
                + rank(jn, k + 2) as i64;
            if value < 0 {
                return Err(Error::NegativeMultiplicity(format!(
                    "string ({j}, {k}) would occur {value} times"
                )));
            }
            row.push(value as usize);
        }
        out.push(row);
    }
    Ok(out)
}

/// The string module I_j^k over the given field: basis v_0..v_k with v_i at
/// node j - i, the arrows shifting down the chain.
pub fn string_module(field: Field, h: usize, j: usize, k: usize) -> Result<QuiverRep> {
    if h == 0 || j == 0 || j > h {
        return Err(Error::ParameterOutOfRange(format!(
            "string top {j} outside 1..={h}"
        )));
    }
    // slot of v_i at its node, counting earlier v's at the same node
    let mut dims = vec![0usize; h];
    let mut slot = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let nu = node(h, j as i64 - i as i64);
        slot.push(dims[nu - 1]);
        dims[nu - 1] += 1;
    }
    let mut maps: Vec<Mat> = (1..=h)
        .map(|nu| {
            Mat::zeros(
                field,
                dims[node(h, nu as i64 - 1) - 1],
                dims[nu - 1],
            )
        })
        .collect();
    for i in 0..k {
        // v_i sits at node j - i and maps to v_{i+1}
        let nu = node(h, j as i64 - i as i64);
        maps[nu - 1].set(slot[i + 1], slot[i], field.one());
    }
    QuiverRep::new(dims, maps)
}

/// Blockwise direct sum of two representations on the same cycle.
pub fn direct_sum(a: &QuiverRep, b: &QuiverRep) -> Result<QuiverRep> {
    if a.h() != b.h() {
        return Err(Error::ArityMismatch {
            expected: a.h(),
            got: b.h(),
        });
    }
    if a.field != b.field {
        return Err(Error::FieldMismatch(
            "summands live over different fields".into(),
        ));
    }
    let h = a.h();
    let dims: Vec<usize> = (0..h).map(|i| a.dims[i] + b.dims[i]).collect();
    let maps: Vec<Mat> = (1..=h)
        .map(|j| {
            let am = a.map(j);
            let bm = b.map(j);
            let mut m = Mat::zeros(a.field, am.nr + bm.nr, am.nc + bm.nc);
            for r in 0..am.nr {
                for c in 0..am.nc {
                    m.set(r, c, am.get(r, c).clone());
                }
            }
            for r in 0..bm.nr {
                for c in 0..bm.nc {
                    m.set(am.nr + r, am.nc + c, bm.get(r, c).clone());
                }
            }
            m
        })
        .collect();
    QuiverRep::new(dims, maps)
}

/// Builds the direct sum of string modules with the given multiplicities,
/// m[j-1][k] copies of I_j^k.
pub fn from_multiplicities(field: Field, h: usize, m: &[Vec<usize>]) -> Result<QuiverRep> {
    if m.len() != h || h == 0 {
        return Err(Error::ArityMismatch {
            expected: h,
            got: m.len(),
        });
    }
    let mut acc: Option<QuiverRep> = None;
    for (j0, row) in m.iter().enumerate() {
        for (k, &count) in row.iter().enumerate() {
            for _ in 0..count {
                let s = string_module(field, h, j0 + 1, k)?;
                acc = Some(match acc {
                    None => s,
                    Some(prev) => direct_sum(&prev, &s)?,
                });
            }
        }
    }
    match acc {
        Some(rep) => Ok(rep),
        None => QuiverRep::new(vec![0; h], {
            (0..h).map(|_| Mat::zeros(field, 0, 0)).collect()
        }),
    }
}

/// Number of length-e paths inside I_j^k that start at node jq: the
/// combinatorial rank table of a string module.
fn string_rank(h: usize, j: usize, k: usize, jq: usize, e: i64) -> usize {
    if e < 0 {
        return (0..=k as i64)
            .filter(|&i| node(h, j as i64 - i) == jq)
            .count();
    }
    if e > k as i64 {
        return 0;
    }
    (0..=(k as i64 - e))
        .filter(|&i| node(h, j as i64 - i) == jq)
        .count()
}

/// Rank table of an abstract direct sum of strings, no matrices involved.
fn rebuilt_rank(h: usize, m: &[Vec<usize>], jq: usize, e: i64) -> usize {
    let mut total = 0;
    for (j0, row) in m.iter().enumerate() {
        for (k, &count) in row.iter().enumerate() {
            if count > 0 {
                total += count * string_rank(h, j0 + 1, k, jq, e);
            }
        }
    }
    total
}

/// 1-based window index of the k-th step of the standard periodic chain for
/// the given node dimensions: steps cycle through the nodes, dropping by a
/// full period every h steps.
pub fn chain_index(dims: &[usize], k: i64) -> i64 {
    let h = dims.len() as i64;
    let n: usize = dims.iter().sum();
    let l = (k - 1).div_euclid(h);
    let nu = (k - 1).rem_euclid(h) as usize;
    let offset: usize = dims[..nu].iter().sum();
    1 + offset as i64 + l * n as i64
}

fn psi_window(h: usize, n: usize) -> (i64, i64) {
    (1, 1 + (n * (h * (n - 1) + 2)) as i64)
}

/// Column data of the stacked construction: for each node j and each e with
/// a nonvanishing composite, the block of M_j^{[e]} placed at the level
/// counting how often the path from j back through e arrows crossed the
/// node-1 boundary.
fn psi_columns(rep: &QuiverRep) -> Vec<Mat> {
    let h = rep.h();
    let n = rep.total_dim();
    let field = rep.field;
    let (lo, hi) = psi_window(h, n);
    let width = (hi - lo) as usize;
    let mut offsets = vec![0usize; h + 1];
    for j in 1..=h {
        offsets[j] = offsets[j - 1] + rep.dims[j - 1];
    }
    let mut groups = Vec::with_capacity(h);
    for j in 1..=h {
        let dj = rep.dims[j - 1];
        let mut cols = Mat::zeros(field, width, dj);
        let mut wraps = 0usize;
        for e in 0..n {
            if e > 0 && node(h, j as i64 - e as i64 + 1) == 1 {
                wraps += 1;
            }
            let t = rep.composite(j, e);
            if t.is_zero() && e > 0 {
                break;
            }
            let nu = node(h, j as i64 - e as i64);
            let level = n - 1 - wraps;
            let base = level * n + offsets[nu - 1];
            for r in 0..rep.dims[nu - 1] {
                for c in 0..dj {
                    let x = t.get(r, c);
                    if !x.is_zero() {
                        cols.set(base + r, c, x.clone());
                    }
                }
            }
        }
        groups.push(cols);
    }
    groups
}

/// The lattice flag of a nilpotent representation. Step j is generated by
/// the stacked columns of nodes j..h together with t times the columns of
/// nodes 1..j-1, so consecutive steps differ by one node and the chain
/// closes up under t.
pub fn psi(rep: &QuiverRep) -> Result<LatticeFlag> {
    let h = rep.h();
    let n = rep.total_dim();
    if rep.dims.contains(&0) {
        return Err(Error::CompositionInvalid(
            "flag construction needs every node dimension positive".into(),
        ));
    }
    let field = rep.field;
    let (lo, hi) = psi_window(h, n);
    let width = (hi - lo) as usize;
    let groups = psi_columns(rep);
    let mut lattices = Vec::with_capacity(h);
    for j in 1..=h {
        let mut cols: Vec<Vec<Scalar>> = Vec::new();
        for (g0, group) in groups.iter().enumerate() {
            let shift = if g0 + 1 < j { n } else { 0 };
            for c in 0..group.nc {
                let mut v = vec![field.zero(); width];
                for r in 0..width {
                    let x = group.get(r, c);
                    if !x.is_zero() && r + shift < width {
                        v[r + shift] = x.clone();
                    }
                }
                cols.push(v);
            }
        }
        let mat = Mat::from_rows(field, cols).transpose();
        lattices.push(LatticeWindow::from_columns(n, lo, hi, &mat)?);
    }
    LatticeFlag::new(rep.dims.clone(), lattices)
}

/// The exponent pairing flag steps with the rank table: step j of the flag
/// meets the k-th standard chain index with codimension r_j^{e(k)} where
/// e(k) = nh - h + j - k + 1.
pub fn chain_exponent(h: usize, n: usize, j: usize, k: i64) -> i64 {
    (n * h - h + j) as i64 - k + 1
}

/// Checks the incidence statistics of the flag of a representation against
/// its rank table, over every chain index visible in the window.
pub fn verify_psi_statistics(rep: &QuiverRep) -> Result<bool> {
    let flag = psi(rep)?;
    let h = rep.h();
    let n = rep.total_dim();
    for j in 1..=h {
        let latt = &flag.lattices[j - 1];
        for k in 1..=(n * h - h + j + 1) as i64 {
            let e = chain_exponent(h, n, j, k);
            let have = latt.codim_above(chain_index(rep.dims(), k))?;
            if have != rep.rank(j, e) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Finite description of a periodic index set: finitely many sporadic
/// members plus the whole ray from cotail on.
#[derive(Clone, Debug)]
struct IndexSet {
    extras: BTreeSet<i64>,
    cotail: i64,
}

impl IndexSet {
    fn contains(&self, s: i64) -> bool {
        s >= self.cotail || self.extras.contains(&s)
    }

    fn count_below(&self, bound: i64) -> usize {
        let sporadic = self.extras.iter().filter(|&&s| s < bound).count();
        let ray = (bound - self.cotail).max(0) as usize;
        sporadic + ray
    }

    fn shifted(&self, by: i64) -> IndexSet {
        IndexSet {
            extras: self.extras.iter().map(|&s| s + by).collect(),
            cotail: self.cotail + by,
        }
    }
}

/// Reads the window of an affine permutation off a full chain of index sets:
/// block j collects the members of S_j missing from its successor, with the
/// chain wrapping into the shift of S_1 by one period.
fn assemble_window(dims: &[usize], sets: &[IndexSet]) -> Option<AffinePermutation> {
    let h = dims.len();
    let n: usize = dims.iter().sum();
    let mut window = Vec::with_capacity(n);
    for j in 0..h {
        let next = if j + 1 < h {
            sets[j + 1].clone()
        } else {
            sets[0].shifted(n as i64)
        };
        let nested = next.extras.iter().all(|&s| sets[j].contains(s))
            && (next.cotail..sets[j].cotail).all(|s| sets[j].contains(s));
        if !nested {
            return None;
        }
        let hi_bound = sets[j].cotail.max(next.cotail);
        let mut block: Vec<i64> = sets[j]
            .extras
            .iter()
            .copied()
            .chain(sets[j].cotail..hi_bound)
            .filter(|&s| sets[j].contains(s) && !next.contains(s))
            .collect();
        block.sort_unstable();
        block.dedup();
        if block.len() != dims[j] {
            return None;
        }
        window.extend(block);
    }
    AffinePermutation::new(window).ok()
}

/// Shell bookkeeping shared by the cell-label search: for node j the
/// sporadic members live among the chain indices of steps
/// k = j + 1 + h(n-1) - h d_j .. j + h(n-1), and the ray starts right after.
struct ShellPlan {
    region: Vec<i64>, // candidate sporadic indices, ascending
    cotail: i64,
}

fn shell_plan(dims: &[usize], j: usize) -> ShellPlan {
    let h = dims.len();
    let n: usize = dims.iter().sum();
    let k_lo = (j + 1 + h * (n - 1) - h * dims[j - 1]) as i64;
    let k_hi = (j + h * (n - 1)) as i64 + 1;
    let lo = chain_index(dims, k_lo);
    let hi = chain_index(dims, k_hi);
    ShellPlan {
        region: (lo..hi).collect(),
        cotail: hi,
    }
}

/// Verifies that candidate index sets carry the rank table of an actual
/// representation: every count must match the table, the derived string
/// multiplicities must be nonnegative, and rebuilding the table from those
/// multiplicities must reproduce it exactly.
fn sets_are_consistent(dims: &[usize], sets: &[IndexSet]) -> bool {
    let h = dims.len();
    let n: usize = dims.iter().sum();
    let rank = |j: usize, e: i64| -> usize {
        if e < 0 {
            return dims[j - 1];
        }
        let k = (n * h - h + j) as i64 + 1 - e;
        sets[j - 1].count_below(chain_index(dims, k))
    };
    let m = match multiplicities_of(h, n, &rank) {
        Ok(m) => m,
        Err(_) => return false,
    };
    let total: usize = m
        .iter()
        .flat_map(|row| row.iter().enumerate().map(|(k, &c)| c * (k + 1)))
        .sum();
    if total != n {
        return false;
    }
    for j in 1..=h {
        for e in 0..=(h * n + 2) as i64 {
            if rebuilt_rank(h, &m, j, e) != rank(j, e) {
                return false;
            }
        }
    }
    true
}

/// The affine permutation whose cell contains the flag of the given
/// representation, found by distributing the sporadic indices of each flag
/// step across its shells according to the rank table, smallest first, with
/// backtracking over ties.
pub fn orbit_permutation(rep: &QuiverRep) -> Result<AffinePermutation> {
    let h = rep.h();
    if rep.dims.contains(&0) {
        return Err(Error::CompositionInvalid(
            "cell labels need every node dimension positive".into(),
        ));
    }
    let dims = rep.dims.clone();
    let plans: Vec<ShellPlan> = (1..=h).map(|j| shell_plan(&dims, j)).collect();

    fn search(
        rep: &QuiverRep,
        dims: &[usize],
        plans: &[ShellPlan],
        sets: &mut Vec<IndexSet>,
        j: usize,
    ) -> Option<AffinePermutation> {
        let h = dims.len();
        let n: usize = dims.iter().sum();
        if j > h {
            let p = assemble_window(dims, sets)?;
            // closure of the chain: the last step must contain the shifted top
            let tail = sets[0].shifted(n as i64);
            let closed = tail.extras.iter().all(|&s| sets[h - 1].contains(s))
                && (tail.cotail..sets[h - 1].cotail).all(|s| sets[h - 1].contains(s));
            if !closed {
                return None;
            }
            for jj in 1..=h {
                for k in 1..=(n * h - h + jj + 1) as i64 {
                    let e = chain_exponent(h, n, jj, k);
                    let want = rep.rank(jj, e);
                    let have = sets[jj - 1].count_below(chain_index(dims, k));
                    if want != have {
                        return None;
                    }
                }
            }
            return Some(p);
        }
        let plan = &plans[j - 1];
        // per-shell quotas from the rank table
        let k_lo = (j + 1 + h * (n - 1) - h * dims[j - 1]) as i64;
        let k_hi = (j + h * (n - 1)) as i64;
        let mut shells: Vec<(i64, i64, usize)> = Vec::new(); // [from, to), quota
        for k in k_lo..=k_hi {
            let e = chain_exponent(h, n, j, k);
            let quota = rep.rank(j, e - 1) - rep.rank(j, e);
            shells.push((
                chain_index(dims, k),
                chain_index(dims, k + 1),
                quota,
            ));
        }
        let available: Vec<i64> = plan
            .region
            .iter()
            .copied()
            .filter(|&s| j == 1 || sets[j - 2].contains(s))
            .collect();

        #[allow(clippy::too_many_arguments)]
        fn fill_shells(
            rep: &QuiverRep,
            dims: &[usize],
            plans: &[ShellPlan],
            sets: &mut Vec<IndexSet>,
            j: usize,
            shells: &[(i64, i64, usize)],
            available: &[i64],
            idx: usize,
            chosen: &mut BTreeSet<i64>,
        ) -> Option<AffinePermutation> {
            if idx == shells.len() {
                sets.push(IndexSet {
                    extras: chosen.clone(),
                    cotail: plans[j - 1].cotail,
                });
                let out = search(rep, dims, plans, sets, j + 1);
                sets.pop();
                return out;
            }
            let (from, to, quota) = shells[idx];
            let pool: Vec<i64> = available
                .iter()
                .copied()
                .filter(|&s| s >= from && s < to)
                .collect();
            if pool.len() < quota {
                return None;
            }
            for combo in pool.iter().copied().combinations(quota) {
                for &s in &combo {
                    chosen.insert(s);
                }
                if let Some(p) = fill_shells(
                    rep, dims, plans, sets, j, shells, available, idx + 1, chosen,
                ) {
                    return Some(p);
                }
                for &s in &combo {
                    chosen.remove(&s);
                }
            }
            None
        }

        let mut chosen = BTreeSet::new();
        fill_shells(
            rep, dims, plans, sets, j, &shells, &available, 0, &mut chosen,
        )
    }

    let mut sets = Vec::new();
    search(rep, &dims, &plans, &mut sets, 1).ok_or_else(|| {
        Error::InconsistentTable("no cell label matches the rank table".into())
    })
}

/// The Bruhat-maximal cell labels reachable for a dimension vector: for each
/// starting node, the lexicographically smallest consistent distribution of
/// sporadic indices found by a cyclic fill, deduplicated into double coset
/// representatives and filtered down to the maximal ones.
pub fn component_permutations(dims: &[usize]) -> Result<Vec<AffinePermutation>> {
    let h = dims.len();
    if h == 0 || dims.contains(&0) {
        return Err(Error::CompositionInvalid(
            "node dimensions must be positive".into(),
        ));
    }
    let plans: Vec<ShellPlan> = (1..=h).map(|j| shell_plan(dims, j)).collect();

    // order[i] is the node filled at stage i: j*, j*+1, ..., wrapping
    fn fill(
        dims: &[usize],
        plans: &[ShellPlan],
        order: &[usize],
        stage: usize,
        sets: &mut Vec<Option<IndexSet>>,
    ) -> Option<AffinePermutation> {
        let h = dims.len();
        let n: usize = dims.iter().sum();
        if stage == order.len() {
            let full: Vec<IndexSet> = sets.iter().map(|s| s.clone().unwrap()).collect();
            // nesting between consecutive nodes, including the wrap
            for j in 1..=h {
                let next = if j < h {
                    full[j].clone()
                } else {
                    full[0].shifted(n as i64)
                };
                let nested = next.extras.iter().all(|&s| full[j - 1].contains(s))
                    && (next.cotail..full[j - 1].cotail).all(|s| full[j - 1].contains(s));
                if !nested {
                    return None;
                }
            }
            if !sets_are_consistent(dims, &full) {
                return None;
            }
            return assemble_window(dims, &full);
        }
        let j = order[stage];
        let prev = if stage == 0 {
            None
        } else {
            let pj = order[stage - 1];
            let pset = sets[pj - 1].clone().unwrap();
            // crossing the h -> 1 boundary constrains through the period shift
            Some(if pj == h && j == 1 {
                pset.shifted(-(n as i64))
            } else {
                pset
            })
        };
        let pool: Vec<i64> = plans[j - 1]
            .region
            .iter()
            .copied()
            .filter(|&s| prev.as_ref().is_none_or(|p| p.contains(s)))
            .collect();
        for combo in pool.iter().copied().combinations(dims[j - 1]) {
            sets[j - 1] = Some(IndexSet {
                extras: combo.iter().copied().collect(),
                cotail: plans[j - 1].cotail,
            });
            if let Some(p) = fill(dims, plans, order, stage + 1, sets) {
                sets[j - 1] = None;
                return Some(p);
            }
            sets[j - 1] = None;
        }
        None
    }

    let mut found: Vec<AffinePermutation> = Vec::new();
    for start in 1..=h {
        let order: Vec<usize> = (0..h).map(|i| (start - 1 + i) % h + 1).collect();
        let mut sets: Vec<Option<IndexSet>> = vec![None; h];
        if let Some(p) = fill(dims, &plans, &order, 0, &mut sets) {
            found.push(p);
        }
    }
    // deduplicate by double coset, then keep only the Bruhat-maximal labels
    let mut reps: Vec<(AffinePermutation, AffinePermutation)> = Vec::new();
    for p in found {
        let key = min_double_coset_rep(&p, dims);
        if !reps.iter().any(|(_, k)| *k == key) {
            reps.push((p, key));
        }
    }
    let mut maximal: Vec<AffinePermutation> = Vec::new();
    for (i, (p, _)) in reps.iter().enumerate() {
        let mut dominated = false;
        for (k, (q, _)) in reps.iter().enumerate() {
            if i != k
                && parabolic_bruhat_leq(p, q, dims)?
                && !parabolic_bruhat_leq(q, p, dims)?
            {
                dominated = true;
                break;
            }
        }
        if !dominated {
            maximal.push(p.clone());
        }
    }
    maximal.sort_by(|a, b| a.cmp_window(b));
    Ok(maximal)
}

/// Random nilpotent representation with the given node dimensions: a random
/// multiset of strings filling the dimension vector, conjugated at every
/// node by a random invertible matrix.
pub fn random_nilpotent_rep(
    rng: &mut Rng64,
    field: Field,
    dims: &[usize],
) -> Result<QuiverRep> {
    let h = dims.len();
    let mut remaining = dims.to_vec();
    let mut rep: Option<QuiverRep> = None;
    while remaining.iter().any(|&d| d > 0) {
        let live: Vec<usize> = (1..=h).filter(|&j| remaining[j - 1] > 0).collect();
        let j = live[rng.below(live.len() as u64) as usize];
        remaining[j - 1] -= 1;
        let mut k = 0usize;
        loop {
            let next = node(h, j as i64 - k as i64 - 1);
            if remaining[next - 1] == 0 || rng.below(3) == 0 {
                break;
            }
            remaining[next - 1] -= 1;
            k += 1;
        }
        let s = string_module(field, h, j, k)?;
        rep = Some(match rep {
            None => s,
            Some(prev) => direct_sum(&prev, &s)?,
        });
    }
    let bare = match rep {
        Some(r) => r,
        None => from_multiplicities(field, h, &vec![vec![]; h])?,
    };
    // pad to the requested dimensions (strings may leave a node empty only
    // when its dimension was zero, so shapes already match) and conjugate
    let gs: Vec<Mat> = (0..h)
        .map(|i| crate::sample::random_invertible(rng, field, bare.dims()[i]))
        .collect();
    let maps: Vec<Mat> = (1..=h)
        .map(|j| {
            let prev = node(h, j as i64 - 1);
            let gi = gs[j - 1].inverse().unwrap();
            gs[prev - 1].mul(bare.map(j)).mul(&gi)
        })
        .collect();
    QuiverRep::new(bare.dims().to_vec(), maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_weyl::AffinePermutation;
    use crate::lattice::{schubert_membership, MembershipMode};
    use crate::lusztig_phi::{phi, NilpotentMatrix};

    fn f2() -> Field {
        Field::from_q(2).unwrap()
    }

    fn scalar_rep(field: Field, entries: &[i64]) -> QuiverRep {
        let h = entries.len();
        let maps: Vec<Mat> = entries
            .iter()
            .map(|&x| Mat::from_i64(field, &[vec![x]]).unwrap())
            .collect();
        QuiverRep::new(vec![1; h], maps).unwrap()
    }

    #[test]
    fn validates_shapes_and_nilpotency() {
        let field = f2();
        // invertible cycle is rejected
        let bad: Vec<Mat> = (0..3).map(|_| Mat::identity(field, 1)).collect();
        assert!(matches!(
            QuiverRep::new(vec![1; 3], bad),
            Err(Error::NotNilpotent(_))
        ));
        // a shape mismatch across an arrow
        let maps = vec![Mat::zeros(field, 1, 2), Mat::zeros(field, 2, 1)];
        assert!(QuiverRep::new(vec![2, 1], maps).is_ok());
        let maps = vec![Mat::zeros(field, 2, 2), Mat::zeros(field, 2, 1)];
        assert!(matches!(
            QuiverRep::new(vec![2, 1], maps),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn rank_table_frozen_example() {
        // three nodes in a line: M_1 and M_2 nonzero, M_3 zero
        let rep = scalar_rep(f2(), &[1, 1, 0]);
        assert_eq!(&rep.rank_table()[0][..4], &[1, 1, 0, 0]);
        assert_eq!(&rep.rank_table()[1][..4], &[1, 1, 1, 0]);
        assert_eq!(&rep.rank_table()[2][..4], &[1, 0, 0, 0]);
    }

    #[test]
    fn string_modules_and_multiplicities() {
        let field = f2();
        // single-node strings are Jordan blocks
        let j2 = string_module(field, 1, 1, 1).unwrap();
        assert_eq!(j2.dims(), &[2]);
        assert_eq!(&j2.rank_table()[0][..3], &[2, 1, 0]);
        let m = j2.multiplicities().unwrap();
        assert_eq!(m[0], vec![0, 1, 0]);
        // zero representation: every node contributes its dimension in
        // length-zero strings
        let zero = QuiverRep::new(
            vec![2, 1],
            vec![Mat::zeros(field, 1, 2), Mat::zeros(field, 2, 1)],
        )
        .unwrap();
        let m = zero.multiplicities().unwrap();
        assert_eq!(m[0][0], 2);
        assert_eq!(m[1][0], 1);
        // the frozen three-node example is a single string of length 2
        let rep = scalar_rep(field, &[1, 1, 0]);
        let m = rep.multiplicities().unwrap();
        let mut expected = vec![vec![0usize; 4]; 3];
        expected[1][2] = 1; // I at top node 2, length 2
        assert_eq!(m, expected);
    }

    #[test]
    fn multiplicities_invert_to_rank_table() {
        let rng = &mut Rng64::new(0x5eed);
        for _ in 0..20 {
            let h = 1 + (rng.below(3) as usize);
            let dims: Vec<usize> = (0..h).map(|_| 1 + rng.below(2) as usize).collect();
            let rep = random_nilpotent_rep(rng, f2(), &dims).unwrap();
            let m = rep.multiplicities().unwrap();
            let rebuilt = from_multiplicities(f2(), h, &m).unwrap();
            assert_eq!(rebuilt.rank_table(), rep.rank_table());
        }
    }

    #[test]
    fn single_node_flag_matches_matrix_construction() {
        let field = f2();
        let j2s = string_module(field, 1, 1, 1).unwrap();
        let flag = psi(&j2s).unwrap();
        assert_eq!(flag.composition, vec![2]);
        let nil = NilpotentMatrix::new(j2s.map(1).clone()).unwrap();
        assert_eq!(flag.lattices[0], phi(&nil).unwrap());
    }

    #[test]
    fn flag_statistics_match_rank_table() {
        let rep = scalar_rep(f2(), &[1, 1, 0]);
        assert!(verify_psi_statistics(&rep).unwrap());
        let rng = &mut Rng64::new(511);
        for q in [2u64, 3] {
            let field = Field::from_q(q).unwrap();
            for _ in 0..6 {
                let h = 1 + (rng.below(3) as usize);
                let dims: Vec<usize> = (0..h).map(|_| 1 + rng.below(2) as usize).collect();
                let rep = random_nilpotent_rep(rng, field, &dims).unwrap();
                assert!(verify_psi_statistics(&rep).unwrap(), "dims {:?}", rep.dims());
            }
        }
    }

    #[test]
    fn orbit_permutations_frozen() {
        let field = f2();
        // single node, zero map on two dimensions: pure translation
        let zero2 = QuiverRep::new(vec![2], vec![Mat::zeros(field, 2, 2)]).unwrap();
        assert_eq!(orbit_permutation(&zero2).unwrap().window(), &[3, 4]);
        // single Jordan block of size two
        let j2 = string_module(field, 1, 1, 1).unwrap();
        assert_eq!(orbit_permutation(&j2).unwrap().window(), &[1, 6]);
        // the three-node line
        let rep = scalar_rep(field, &[1, 1, 0]);
        assert_eq!(orbit_permutation(&rep).unwrap().window(), &[8, 6, 10]);
    }

    #[test]
    fn single_node_labels_read_off_jordan_type() {
        let rng = &mut Rng64::new(2024);
        for _ in 0..10 {
            let n = 2 + rng.below(3) as usize;
            let rep = random_nilpotent_rep(rng, f2(), &[n]).unwrap();
            let p = orbit_permutation(&rep).unwrap();
            let nil = NilpotentMatrix::new(rep.map(1).clone()).unwrap();
            let mut blocks = nil.jordan_type();
            blocks.resize(n, 0);
            let want: Vec<i64> = (1..=n)
                .map(|i| i as i64 + (n * (n - blocks[i - 1])) as i64)
                .collect();
            assert_eq!(p.window(), &want[..], "type {:?}", blocks);
        }
    }

    #[test]
    fn flags_lie_in_their_cells() {
        let rep = scalar_rep(f2(), &[1, 1, 0]);
        let flag = psi(&rep).unwrap();
        let p = orbit_permutation(&rep).unwrap();
        assert!(schubert_membership(&flag, &p, MembershipMode::Cell).unwrap());
        let rng = &mut Rng64::new(77);
        for _ in 0..6 {
            let h = 1 + (rng.below(2) as usize);
            let dims: Vec<usize> = (0..h).map(|_| 1 + rng.below(2) as usize).collect();
            let rep = random_nilpotent_rep(rng, f2(), &dims).unwrap();
            let flag = psi(&rep).unwrap();
            let p = orbit_permutation(&rep).unwrap();
            assert!(
                schubert_membership(&flag, &p, MembershipMode::Cell).unwrap(),
                "dims {:?} label {:?}",
                rep.dims(),
                p.window()
            );
        }
    }

    #[test]
    fn rotation_conjugates_the_label() {
        let field = f2();
        let rep = scalar_rep(field, &[1, 1, 0]);
        let n = rep.total_dim();
        let sigma = AffinePermutation::sigma(n);
        let rotated = rep.rotate();
        let lhs = orbit_permutation(&rotated).unwrap();
        let rhs = sigma
            .compose(&orbit_permutation(&rep).unwrap())
            .unwrap()
            .compose(&sigma.inverse())
            .unwrap();
        assert_eq!(lhs, rhs);
        let rng = &mut Rng64::new(31337);
        for _ in 0..6 {
            let rep = random_nilpotent_rep(rng, field, &[1, 1, 1]).unwrap();
            let lhs = orbit_permutation(&rep.rotate()).unwrap();
            let rhs = sigma
                .compose(&orbit_permutation(&rep).unwrap())
                .unwrap()
                .compose(&sigma.inverse())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn component_labels_frozen() {
        // one node: the regular class dominates everything
        assert_eq!(
            component_permutations(&[2])
                .unwrap()
                .iter()
                .map(|p| p.window().to_vec())
                .collect::<Vec<_>>(),
            vec![vec![1, 6]]
        );
        let got: Vec<Vec<i64>> = component_permutations(&[1, 1, 1])
            .unwrap()
            .iter()
            .map(|p| p.window().to_vec())
            .collect();
        let mut want = vec![vec![5, 9, 10], vec![8, 6, 10], vec![8, 9, 7]];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn component_labels_are_reachable() {
        // every component label is the label of an actual representation
        for dims in [vec![1usize, 1, 1], vec![2], vec![3]] {
            let labels = component_permutations(&dims).unwrap();
            assert!(!labels.is_empty());
            let rng = &mut Rng64::new(0xfeed);
            let mut seen = std::collections::HashSet::new();
            for _ in 0..60 {
                let rep = random_nilpotent_rep(rng, f2(), &dims).unwrap();
                seen.insert(orbit_permutation(&rep).unwrap());
            }
            for label in &labels {
                assert!(
                    seen.contains(label),
                    "label {:?} for dims {:?} not hit",
                    label.window(),
                    dims
                );
            }
        }
    }
}
