//! Finite-window models of full-rank lattices in k((t))^n and chains of them.
//!
//! We identify k((t))^n with formal series in basis vectors e_j (j ranging
//! over all integers) via t * e_j = e_{j+n}, and write E_j for the closed
//! span of all e_i with i >= j. A `LatticeWindow` stores a lattice L with
//! E_hi <= L <= span(e_i : i >= lo) as a subspace of the finite coordinate
//! patch [lo, hi) together with the implicit tail E_hi. All linear algebra
//! happens inside the patch, so every dimension computed here is exact.

use crate::affine_weyl::AffinePermutation;
use crate::error::{Error, Result};
use crate::field::{Field, Mat, Scalar, Subspace};
use itertools::Itertools;

/// Membership test flavor: the open cell asks for equality of all incidence
/// numbers, the closed cell only for the inequalities.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MembershipMode {
    Cell,
    Variety,
}

/// A full-rank lattice presented on the index window [lo, hi).
///
/// Coordinate idx of the stored subspace corresponds to e_{lo + idx}; the
/// lattice itself is the row span plus all of E_hi. The window length hi - lo
/// is a positive multiple of n so the patch is stable under reindexing by t.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LatticeWindow {
    n: usize,
    lo: i64,
    hi: i64,
    basis: Subspace,
}

fn check_window(n: usize, lo: i64, hi: i64) -> Result<()> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("rank must be positive".into()));
    }
    let span = hi - lo;
    if span <= 0 || span % (n as i64) != 0 {
        return Err(Error::WindowTooSmall(format!(
            "window [{lo}, {hi}) must have positive length divisible by {n}"
        )));
    }
    Ok(())
}

impl LatticeWindow {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn field(&self) -> Field {
        self.basis.field
    }

    /// Dimension of L / E_hi, the visible part of the lattice.
    pub fn dim_window(&self) -> usize {
        self.basis.dim()
    }

    /// Canonical basis of the visible part, coordinates indexed by the window.
    pub fn basis_rows(&self) -> Vec<Vec<Scalar>> {
        self.basis.basis().rows_vec()
    }

    fn width(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    fn same_window(&self, other: &LatticeWindow) -> Result<()> {
        if self.n != other.n
            || self.lo != other.lo
            || self.hi != other.hi
            || self.basis.field != other.basis.field
        {
            return Err(Error::IncompatibleWindows(format!(
                "[{}, {}) rank {} vs [{}, {}) rank {}",
                self.lo, self.hi, self.n, other.lo, other.hi, other.n
            )));
        }
        Ok(())
    }

    /// The standard lattice E_j on the given window. Requires lo <= j <= hi
    /// so that E_j really lies between the window ends.
    pub fn standard(n: usize, lo: i64, hi: i64, field: Field, j: i64) -> Result<LatticeWindow> {
        check_window(n, lo, hi)?;
        if j < lo || j > hi {
            return Err(Error::IndexOutsideWindow(format!(
                "standard lattice index {j} outside [{lo}, {hi}]"
            )));
        }
        let m = (hi - lo) as usize;
        let start = (j - lo) as usize;
        let mut rows = Vec::new();
        for idx in start..m {
            let mut row = vec![field.zero(); m];
            row[idx] = field.one();
            rows.push(row);
        }
        let basis = Subspace::from_rows(field, m, rows);
        Ok(LatticeWindow { n, lo, hi, basis })
    }

    /// Builds the smallest t-stable lattice containing E_hi and the given
    /// column vectors. Columns are coordinate vectors over the window (row
    /// index idx meaning e_{lo+idx}). Multiplying by t shifts a vector n
    /// coordinates deeper; components falling past hi are absorbed by the
    /// tail, so the closure stabilizes after finitely many rounds.
    pub fn from_columns(n: usize, lo: i64, hi: i64, columns: &Mat) -> Result<LatticeWindow> {
        check_window(n, lo, hi)?;
        let m = (hi - lo) as usize;
        if columns.nr != m {
            return Err(Error::ShapeMismatch(format!(
                "columns have {} coordinates, window needs {}",
                columns.nr, m
            )));
        }
        let field = columns.field;
        let mut rows: Vec<Vec<Scalar>> = (0..columns.nc).map(|c| columns.col(c)).collect();
        loop {
            let current = Subspace::from_rows(field, m, rows.clone());
            let mut next_rows = current.basis().rows_vec();
            for row in current.basis().rows_vec() {
                next_rows.push(shift_row_down(&row, n, field));
            }
            let next = Subspace::from_rows(field, m, next_rows);
            if next.dim() == current.dim() {
                return Ok(LatticeWindow {
                    n,
                    lo,
                    hi,
                    basis: current,
                });
            }
            rows = next.basis().rows_vec();
        }
    }

    /// Wraps an explicit visible subspace, provided it is stable under the
    /// truncated t-action; callers get None otherwise.
    fn from_subspace_checked(n: usize, lo: i64, hi: i64, basis: Subspace) -> Option<LatticeWindow> {
        if !is_t_stable(&basis, n) {
            return None;
        }
        Some(LatticeWindow { n, lo, hi, basis })
    }

    pub fn contains(&self, other: &LatticeWindow) -> Result<bool> {
        self.same_window(other)?;
        Ok(self.basis.contains(&other.basis))
    }

    /// dim(self / self meet other), via dim(self + other) - dim(other).
    pub fn rel_dim(&self, other: &LatticeWindow) -> Result<usize> {
        self.same_window(other)?;
        Ok(self.basis.dim_sum(&other.basis) - other.basis.dim())
    }

    /// Virtual dimension dim(L / L meet E_1) - dim(E_1 / E_1 meet L).
    /// Zero exactly on the lattices commensurable with E_1 at no net index
    /// shift; drops by one when all indices shift up by one.
    pub fn vdim(&self) -> Result<i64> {
        if !(self.lo < 1 && 1 <= self.hi - self.n as i64) {
            return Err(Error::WindowTooSmall(format!(
                "vdim needs index 1 strictly inside [{}, {})",
                self.lo, self.hi
            )));
        }
        let e1 = LatticeWindow::standard(self.n, self.lo, self.hi, self.field(), 1)?;
        let up = self.rel_dim(&e1)? as i64;
        let down = e1.rel_dim(self)? as i64;
        Ok(up - down)
    }

    /// Multiplication by t^s, kept on the same window. Shifting down (s > 0)
    /// requires L >= E_{hi - s n} so that the result still contains the tail;
    /// shifting up requires every basis vector to stay at or above lo.
    pub fn shift(&self, s: i64) -> Result<LatticeWindow> {
        if s == 0 {
            return Ok(self.clone());
        }
        let field = self.field();
        let m = self.width();
        let step = self.n as i64 * s;
        if s > 0 {
            let needed = self.hi - step;
            if needed < self.lo {
                return Err(Error::WindowTooSmall(format!(
                    "t^{s} shift needs the window to reach {needed}"
                )));
            }
            let floor = LatticeWindow::standard(self.n, self.lo, self.hi, field, needed)?;
            if !self.contains(&floor)? {
                return Err(Error::WindowTooSmall(format!(
                    "t^{s} shift of this lattice would not contain E_{}",
                    self.hi
                )));
            }
            let rows: Vec<Vec<Scalar>> = self
                .basis_rows()
                .iter()
                .map(|row| shift_row_down(row, step as usize, field))
                .collect();
            let basis = Subspace::from_rows(field, m, rows);
            Ok(LatticeWindow {
                n: self.n,
                lo: self.lo,
                hi: self.hi,
                basis,
            })
        } else {
            let k = (-step) as usize;
            let mut rows = Vec::new();
            for row in self.basis_rows() {
                if row.iter().take(k).any(|x| !x.is_zero()) {
                    return Err(Error::WindowTooSmall(format!(
                        "t^{s} shift pushes support below {}",
                        self.lo
                    )));
                }
                let mut shifted = row[k..].to_vec();
                shifted.extend(vec![field.zero(); k]);
                rows.push(shifted);
            }
            // t^s E_hi reaches down to hi + s n; those vectors become visible.
            for idx in (m - k)..m {
                let mut row = vec![field.zero(); m];
                row[idx] = field.one();
                rows.push(row);
            }
            let basis = Subspace::from_rows(field, m, rows);
            Ok(LatticeWindow {
                n: self.n,
                lo: self.lo,
                hi: self.hi,
                basis,
            })
        }
    }

    /// Re-expresses the lattice on another window. Fails if the lattice has
    /// support below new_lo or does not contain E_{new_hi}.
    pub fn rewindow(&self, new_lo: i64, new_hi: i64) -> Result<LatticeWindow> {
        check_window(self.n, new_lo, new_hi)?;
        let field = self.field();
        if new_hi < self.hi {
            if new_hi < self.lo {
                return Err(Error::WindowTooSmall(format!(
                    "new tail E_{new_hi} starts below the current window"
                )));
            }
            let tail = LatticeWindow::standard(self.n, self.lo, self.hi, field, new_hi)?;
            if !self.contains(&tail)? {
                return Err(Error::WindowTooSmall(format!(
                    "lattice does not contain E_{new_hi}"
                )));
            }
        }
        let m_new = (new_hi - new_lo) as usize;
        let offset = self.lo - new_lo; // new position of old coordinate 0
        let mut rows = Vec::new();
        for row in self.basis_rows() {
            let mut out = vec![field.zero(); m_new];
            for (idx, x) in row.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                let pos = offset + idx as i64;
                if pos < 0 {
                    return Err(Error::WindowTooSmall(format!(
                        "lattice has support at {} below {new_lo}",
                        self.lo + idx as i64
                    )));
                }
                if pos < m_new as i64 {
                    out[pos as usize] = x.clone();
                }
            }
            rows.push(out);
        }
        // Part of the old tail that becomes visible in the new window.
        let start = (self.hi - new_lo).max(0);
        for pos in start..(new_hi - new_lo) {
            let mut out = vec![field.zero(); m_new];
            out[pos as usize] = field.one();
            rows.push(out);
        }
        let basis = Subspace::from_rows(field, m_new, rows);
        Ok(LatticeWindow {
            n: self.n,
            lo: new_lo,
            hi: new_hi,
            basis,
        })
    }

    /// dim of L meet span(e_i : i < j), exact for j <= hi because the tail
    /// E_hi cannot contribute to coordinates below hi.
    pub fn dim_meet_prefix(&self, j: i64) -> Result<usize> {
        if j < self.lo || j > self.hi {
            return Err(Error::IndexOutsideWindow(format!(
                "prefix index {j} outside [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(self.basis.dim_meet_prefix((j - self.lo) as usize))
    }

    /// dim(L / L meet E_j) for j in [lo, hi].
    pub fn codim_above(&self, j: i64) -> Result<usize> {
        if j < self.lo || j > self.hi {
            return Err(Error::IndexOutsideWindow(format!(
                "index {j} outside [{}, {}]",
                self.lo, self.hi
            )));
        }
        let idx = (j - self.lo) as usize;
        let in_suffix = self
            .basis
            .shallow_pivots()
            .iter()
            .filter(|&&p| p >= idx)
            .count();
        Ok(self.basis.dim() - in_suffix)
    }
}

fn shift_row_down(row: &[Scalar], k: usize, field: Field) -> Vec<Scalar> {
    let m = row.len();
    let mut out = vec![field.zero(); m];
    for (idx, x) in row.iter().enumerate() {
        if idx + k < m && !x.is_zero() {
            out[idx + k] = x.clone();
        }
    }
    out
}

fn is_t_stable(basis: &Subspace, n: usize) -> bool {
    basis
        .basis()
        .rows_vec()
        .iter()
        .all(|row| basis.contains_vector(&shift_row_down(row, n, basis.field)))
}

/// A periodic chain of lattices: L_1 >= L_2 >= ... >= L_h with
/// dim(L_j / L_{j+1}) = d_j, closing up with L_h >= t L_1 of jump d_h.
/// The composition (d_1, ..., d_h) must sum to the rank n.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LatticeFlag {
    pub composition: Vec<usize>,
    pub lattices: Vec<LatticeWindow>,
}

impl LatticeFlag {
    pub fn new(composition: Vec<usize>, lattices: Vec<LatticeWindow>) -> Result<LatticeFlag> {
        if lattices.is_empty() {
            return Err(Error::CompositionInvalid(
                "flag needs at least one lattice".into(),
            ));
        }
        let n = lattices[0].n();
        validate_composition(&composition, n)?;
        if composition.len() != lattices.len() {
            return Err(Error::CompositionInvalid(format!(
                "{} parts vs {} lattices",
                composition.len(),
                lattices.len()
            )));
        }
        for other in &lattices[1..] {
            lattices[0].same_window(other)?;
        }
        let h = lattices.len();
        for j in 0..h - 1 {
            if !lattices[j].contains(&lattices[j + 1])? {
                return Err(Error::ConstraintViolation(format!(
                    "flag step {} does not contain step {}",
                    j + 1,
                    j + 2
                )));
            }
            let step = lattices[j].rel_dim(&lattices[j + 1])?;
            if step != composition[j] {
                return Err(Error::ConstraintViolation(format!(
                    "flag step {} has jump {} instead of {}",
                    j + 1,
                    step,
                    composition[j]
                )));
            }
        }
        // Closure L_h >= t L_1: the truncated t-shift of every visible basis
        // vector of L_1 must lie in L_h (components past hi land in the tail).
        // The final jump dim(L_h / t L_1) = d_h is then automatic from the
        // earlier jumps because t acts with total codimension n.
        let top = &lattices[0];
        let bot = &lattices[h - 1];
        let field = top.field();
        for row in top.basis_rows() {
            let shifted = shift_row_down(&row, n, field);
            if !bot.basis.contains_vector(&shifted) {
                return Err(Error::ConstraintViolation(
                    "flag does not close up under t".into(),
                ));
            }
        }
        Ok(LatticeFlag {
            composition,
            lattices,
        })
    }

    pub fn n(&self) -> usize {
        self.lattices[0].n()
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lattices[0].lo(), self.lattices[0].hi())
    }

    pub fn field(&self) -> Field {
        self.lattices[0].field()
    }

    /// 1-based start positions of the flag steps: 1, 1+d_1, 1+d_1+d_2, ...
    pub fn positions(&self) -> Vec<i64> {
        flag_positions(&self.composition)
    }

    /// The standard flag refining the chain of E_j for this composition.
    pub fn standard(
        composition: Vec<usize>,
        lo: i64,
        hi: i64,
        field: Field,
    ) -> Result<LatticeFlag> {
        let n: usize = composition.iter().sum();
        validate_composition(&composition, n)?;
        let mut lattices = Vec::new();
        for pos in flag_positions(&composition) {
            lattices.push(LatticeWindow::standard(n, lo, hi, field, pos)?);
        }
        LatticeFlag::new(composition, lattices)
    }
}

fn validate_composition(composition: &[usize], n: usize) -> Result<()> {
    if composition.is_empty() || composition.contains(&0) {
        return Err(Error::CompositionInvalid("parts must be positive".into()));
    }
    let total: usize = composition.iter().sum();
    if total != n {
        return Err(Error::CompositionInvalid(format!(
            "parts sum to {total}, rank is {n}"
        )));
    }
    Ok(())
}

fn flag_positions(composition: &[usize]) -> Vec<i64> {
    let mut out = Vec::with_capacity(composition.len());
    let mut acc = 1i64;
    for &d in composition {
        out.push(acc);
        acc += d as i64;
    }
    out
}

/// Incidence ceiling for position i: one more than the largest value of p on
/// the n positions just before i. Every value of p at a position below i
/// stays strictly under this bound, so past it the counting profile of p at
/// level i grows by exactly one per index.
fn level_ceiling(p: &AffinePermutation, i: i64) -> i64 {
    let n = p.n() as i64;
    (i - n..i).map(|m| p.apply(m)).max().unwrap() + 1
}

/// profile[idx] = dim(L / L meet E_{lo+idx}) for idx in 0..=width.
fn suffix_profile(latt: &LatticeWindow) -> Vec<usize> {
    let m = latt.width();
    let dim = latt.dim_window();
    let mut meet_from = vec![0usize; m + 2];
    for p in latt.basis.shallow_pivots() {
        meet_from[p] += 1;
    }
    // meet_from[idx] becomes the number of basis rows supported in [idx, m)
    for idx in (0..=m).rev() {
        meet_from[idx] += meet_from[idx + 1];
    }
    (0..=m).map(|idx| dim - meet_from[idx]).collect()
}

/// Checks whether the flag lies in the open cell (equalities) or closed cell
/// (inequalities) attached to p, comparing window profiles with the counting
/// profile of p at every flag position. A window that cannot see all binding
/// indices is reported as too small; a visible-dimension mismatch means the
/// flag sits in a different connected component and is simply not a member.
pub fn schubert_membership(
    flag: &LatticeFlag,
    p: &AffinePermutation,
    mode: MembershipMode,
) -> Result<bool> {
    if p.n() != flag.n() {
        return Err(Error::RankMismatch(format!(
            "permutation rank {} vs flag rank {}",
            p.n(),
            flag.n()
        )));
    }
    let (lo, hi) = flag.window();
    let min_val = (1..=p.n() as i64).map(|m| p.apply(m)).min().unwrap();
    if lo > min_val {
        return Err(Error::WindowTooSmall(format!(
            "window floor {lo} above smallest window value {min_val}"
        )));
    }
    for (latt, &pos) in flag.lattices.iter().zip(flag.positions().iter()) {
        let ceil = level_ceiling(p, pos);
        if ceil > hi {
            return Err(Error::WindowTooSmall(format!(
                "window roof {hi} below incidence ceiling {ceil} at position {pos}"
            )));
        }
        if latt.dim_window() != p.count_escape(pos, hi) as usize {
            return Ok(false);
        }
        let profile = suffix_profile(latt);
        for j in (lo + 1)..hi {
            let have = profile[(j - lo) as usize];
            let want = p.count_escape(pos, j) as usize;
            let ok = match mode {
                MembershipMode::Cell => have == want,
                MembershipMode::Variety => have <= want,
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Transversality against the opposite standard chain: for each flag step at
/// position i, tests L_i meet span(e_r : r < i + k) = 0. Errors if the window
/// cannot see far enough down to decide; returns false outright when the
/// probe passes hi, since the tail E_hi then meets the span for sure.
pub fn opposite_cell_test(flag: &LatticeFlag, k: i64) -> Result<bool> {
    let (lo, hi) = flag.window();
    for (latt, &pos) in flag.lattices.iter().zip(flag.positions().iter()) {
        let probe = pos + k;
        if probe - 1 < lo {
            return Err(Error::WindowTooSmall(format!(
                "opposite test at {probe} reaches below window floor {lo}"
            )));
        }
        if probe > hi {
            return Ok(false);
        }
        if latt.dim_meet_prefix(probe)? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Window just large enough to decide membership for p at all flag positions
/// of the composition: floor at the smallest window value, roof at the
/// largest incidence ceiling, padded up to a full period.
pub fn default_window(p: &AffinePermutation, composition: &[usize]) -> Result<(i64, i64)> {
    let n = p.n();
    validate_composition(composition, n)?;
    let lo = (1..=n as i64).map(|m| p.apply(m)).min().unwrap();
    let mut hi = flag_positions(composition)
        .iter()
        .map(|&pos| level_ceiling(p, pos))
        .max()
        .unwrap();
    if hi < lo + n as i64 {
        hi = lo + n as i64;
    }
    let rem = (hi - lo).rem_euclid(n as i64);
    if rem != 0 {
        hi += n as i64 - rem;
    }
    Ok((lo, hi))
}

/// All r-dimensional subspaces of F^m as reduced row echelon bases, one per
/// subspace: for each pivot column set, free entries run over the field.
fn subspaces_of_dim(field: Field, m: usize, r: usize) -> Vec<Vec<Vec<Scalar>>> {
    if r > m {
        return Vec::new();
    }
    if r == 0 {
        return vec![Vec::new()];
    }
    let elems = field.elements();
    let mut out = Vec::new();
    for pivots in (0..m).combinations(r) {
        let mut free = Vec::new();
        for (ri, &pc) in pivots.iter().enumerate() {
            for c in (pc + 1)..m {
                if !pivots.contains(&c) {
                    free.push((ri, c));
                }
            }
        }
        let mut counters = vec![0usize; free.len()];
        loop {
            let mut rows = vec![vec![field.zero(); m]; r];
            for (ri, &pc) in pivots.iter().enumerate() {
                rows[ri][pc] = field.one();
            }
            for (slot, &(ri, c)) in free.iter().enumerate() {
                rows[ri][c] = elems[counters[slot]].clone();
            }
            out.push(rows);
            let mut k = 0;
            while k < counters.len() {
                counters[k] += 1;
                if counters[k] < elems.len() {
                    break;
                }
                counters[k] = 0;
                k += 1;
            }
            if k == counters.len() {
                break;
            }
        }
    }
    out
}

/// Lifts each r-dimensional subspace of span(reps) modulo floor to the full
/// subspace floor + lift inside the ambient space.
fn lift_through_quotient(floor: &Subspace, reps: &[Vec<Scalar>], r: usize) -> Vec<Subspace> {
    let field = floor.field;
    let m = floor.ambient;
    let mut out = Vec::new();
    for combo_rows in subspaces_of_dim(field, reps.len(), r) {
        let mut rows = floor.basis().rows_vec();
        for combo in &combo_rows {
            let mut v = vec![field.zero(); m];
            for (coef, rep) in combo.iter().zip(reps.iter()) {
                if coef.is_zero() {
                    continue;
                }
                for (idx, x) in rep.iter().enumerate() {
                    if !x.is_zero() {
                        v[idx] = field.add(&v[idx], &field.mul(coef, x));
                    }
                }
            }
            rows.push(v);
        }
        out.push(Subspace::from_rows(field, m, rows));
    }
    out
}

fn profile_ok(latt: &LatticeWindow, p: &AffinePermutation, pos: i64, mode: MembershipMode) -> bool {
    let (lo, hi) = (latt.lo(), latt.hi());
    let profile = suffix_profile(latt);
    for j in (lo + 1)..hi {
        let have = profile[(j - lo) as usize];
        let want = p.count_escape(pos, j) as usize;
        let ok = match mode {
            MembershipMode::Cell => have == want,
            MembershipMode::Variety => have <= want,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Counts the F_q points of the open or closed cell of p in the space of
/// complete lattice flags, optionally intersected with the opposite-chain
/// transversality locus at offset k. Small cases only.
pub fn enumerate_flag_points(
    p: &AffinePermutation,
    q: u64,
    mode: MembershipMode,
    opposite: Option<i64>,
) -> Result<u64> {
    let composition = vec![1usize; p.n()];
    Ok(enumerate_flags(p, &composition, q, mode, opposite)?.len() as u64)
}

/// Same count over the partial flags of an arbitrary composition.
pub fn enumerate_flag_points_with(
    p: &AffinePermutation,
    composition: &[usize],
    q: u64,
    mode: MembershipMode,
    opposite: Option<i64>,
) -> Result<u64> {
    Ok(enumerate_flags(p, composition, q, mode, opposite)?.len() as u64)
}

/// The member flags themselves. Guarded: the search is exponential in the
/// length of p, and only the two smallest fields keep fibers enumerable.
pub fn enumerate_flags(
    p: &AffinePermutation,
    composition: &[usize],
    q: u64,
    mode: MembershipMode,
    opposite: Option<i64>,
) -> Result<Vec<LatticeFlag>> {
    if p.length() > 8 {
        return Err(Error::GuardExceeded(format!(
            "length {} exceeds enumeration guard 8",
            p.length()
        )));
    }
    if q != 2 && q != 3 {
        return Err(Error::GuardExceeded(format!(
            "field size {q} outside enumeration guard {{2, 3}}"
        )));
    }
    let field = Field::from_q(q)?;
    let n = p.n();
    validate_composition(composition, n)?;
    let (lo, hi) = default_window(p, composition)?;
    let positions = flag_positions(composition);

    // Forced floors: every flag in the closed cell of p satisfies
    // L_j >= E_{ceiling}, because the profile inequality at the ceiling index
    // together with the pinned visible dimension saturates the whole co-tail.
    let mut floors = Vec::with_capacity(positions.len());
    let mut dims = Vec::with_capacity(positions.len());
    for &pos in &positions {
        let b = level_ceiling(p, pos);
        floors.push(LatticeWindow::standard(n, lo, hi, field, b)?);
        dims.push(p.count_escape(pos, hi) as usize);
    }

    let full = LatticeWindow::standard(n, lo, hi, field, lo)?;
    let mut found: Vec<LatticeFlag> = Vec::new();
    let mut chain: Vec<LatticeWindow> = Vec::new();
    dfs_levels(
        p, composition, &positions, &floors, &dims, mode, opposite, &full, &mut chain, &mut found,
    )?;
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn dfs_levels(
    p: &AffinePermutation,
    composition: &[usize],
    positions: &[i64],
    floors: &[LatticeWindow],
    dims: &[usize],
    mode: MembershipMode,
    opposite: Option<i64>,
    full: &LatticeWindow,
    chain: &mut Vec<LatticeWindow>,
    found: &mut Vec<LatticeFlag>,
) -> Result<()> {
    let j = chain.len();
    if j == positions.len() {
        found.push(LatticeFlag::new(composition.to_vec(), chain.clone())?);
        return Ok(());
    }
    let n = p.n();
    let field = full.field();
    let (lo, hi) = (full.lo(), full.hi());

    // Floor for this level: the forced standard part, joined with t * L_1
    // once the top of the chain is fixed (the chain closes up under t).
    let mut floor = floors[j].basis.clone();
    if j > 0 {
        let shifted_rows: Vec<Vec<Scalar>> = chain[0]
            .basis_rows()
            .iter()
            .map(|row| shift_row_down(row, n, field))
            .collect();
        let shifted = Subspace::from_rows(field, floor.ambient, shifted_rows);
        floor = floor.sum(&shifted);
    }
    let above = if j == 0 { full } else { &chain[j - 1] };
    if !above.basis.contains(&floor) {
        return Ok(()); // incompatible branch, nothing below it
    }
    let want = dims[j];
    let base = floor.dim();
    if want < base || above.dim_window() < want {
        return Ok(());
    }
    let reps = above.basis.quotient_reps(&floor);
    for candidate in lift_through_quotient(&floor, &reps, want - base) {
        let latt = match LatticeWindow::from_subspace_checked(n, lo, hi, candidate) {
            Some(l) => l,
            None => continue, // not stable under t, not a lattice
        };
        if !profile_ok(&latt, p, positions[j], mode) {
            continue;
        }
        if let Some(k) = opposite {
            let probe = positions[j] + k;
            if probe - 1 < lo {
                return Err(Error::WindowTooSmall(format!(
                    "opposite test at {probe} reaches below window floor {lo}"
                )));
            }
            if probe > hi || latt.dim_meet_prefix(probe)? != 0 {
                continue;
            }
        }
        chain.push(latt);
        dfs_levels(
            p, composition, positions, floors, dims, mode, opposite, full, chain, found,
        )?;
        chain.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_weyl::{bruhat_interval, AffinePermutation};
    use crate::field::{Field, Mat};
    use crate::sample::Rng64;

    fn f2() -> Field {
        Field::from_q(2).unwrap()
    }

    fn perm(w: &[i64]) -> AffinePermutation {
        AffinePermutation::new(w.to_vec()).unwrap()
    }

    #[test]
    fn standard_lattice_dims() {
        let e1 = LatticeWindow::standard(3, -2, 4, f2(), 1).unwrap();
        assert_eq!(e1.dim_window(), 3);
        assert_eq!(e1.vdim().unwrap(), 0);
        let e0 = LatticeWindow::standard(3, -2, 4, f2(), 0).unwrap();
        assert_eq!(e0.vdim().unwrap(), 1);
        let e3 = LatticeWindow::standard(3, -2, 4, f2(), 3).unwrap();
        assert_eq!(e3.vdim().unwrap(), -2);
        assert!(e0.contains(&e1).unwrap());
        assert!(!e1.contains(&e0).unwrap());
        assert_eq!(e0.rel_dim(&e3).unwrap(), 3);
        assert_eq!(e3.rel_dim(&e0).unwrap(), 0);
        assert!(LatticeWindow::standard(3, -2, 4, f2(), 5).is_err());
        assert!(LatticeWindow::standard(3, -2, 3, f2(), 1).is_err());
    }

    #[test]
    fn shift_matches_standard() {
        let e1 = LatticeWindow::standard(3, -2, 4, f2(), 1).unwrap();
        assert_eq!(
            e1.shift(1).unwrap(),
            LatticeWindow::standard(3, -2, 4, f2(), 4).unwrap()
        );
        assert_eq!(
            e1.shift(-1).unwrap(),
            LatticeWindow::standard(3, -2, 4, f2(), -2).unwrap()
        );
        // the tail-only lattice has nothing left to shift down
        let e4 = LatticeWindow::standard(3, -2, 4, f2(), 4).unwrap();
        assert!(e4.shift(1).is_err());
        // the full window cannot shift up without losing support
        let em2 = LatticeWindow::standard(3, -2, 4, f2(), -2).unwrap();
        assert!(em2.shift(-1).is_err());
    }

    #[test]
    fn from_columns_closes_under_t() {
        let field = f2();
        // single generator e_{-2} + e_1 on window [-2, 4): its t-shift is
        // e_1 + e_4, and e_4 is absorbed by the tail, so closure adds e_1.
        let mut cols = Mat::zeros(field, 6, 1);
        cols.set(0, 0, field.one());
        cols.set(3, 0, field.one());
        let latt = LatticeWindow::from_columns(3, -2, 4, &cols).unwrap();
        assert_eq!(latt.dim_window(), 2);
        assert_eq!(latt.dim_meet_prefix(1).unwrap(), 1);
        assert_eq!(latt.dim_meet_prefix(2).unwrap(), 2);
        // idempotent: feeding the visible basis back reproduces the lattice
        let again = LatticeWindow::from_columns(
            3,
            -2,
            4,
            &Mat::from_rows(field, latt.basis_rows()).transpose(),
        )
        .unwrap();
        assert_eq!(again, latt);
    }

    #[test]
    fn rewindow_round_trip() {
        let field = f2();
        let e1 = LatticeWindow::standard(3, -2, 4, field, 1).unwrap();
        let wide = e1.rewindow(-5, 7).unwrap();
        assert_eq!(wide, LatticeWindow::standard(3, -5, 7, field, 1).unwrap());
        assert_eq!(wide.vdim().unwrap(), 0);
        assert_eq!(wide.rewindow(-2, 4).unwrap(), e1);
        // support below the new floor is an error
        let full = LatticeWindow::standard(3, -5, 7, field, -5).unwrap();
        assert!(full.rewindow(-2, 4).is_err());
    }

    #[test]
    fn standard_flag_validates() {
        let flag = LatticeFlag::standard(vec![1, 1, 1], -2, 4, f2()).unwrap();
        assert_eq!(flag.positions(), vec![1, 2, 3]);
        let flag23 = LatticeFlag::standard(vec![2, 3], -2, 8, f2()).unwrap();
        assert_eq!(flag23.positions(), vec![1, 3]);
        assert!(LatticeFlag::standard(vec![2, 2], -2, 4, f2()).is_err());
        // wrong jump: E_1 >= E_3 has jump 2, composition says (1, 2) reversed
        let e1 = LatticeWindow::standard(3, -2, 4, f2(), 1).unwrap();
        let e3 = LatticeWindow::standard(3, -2, 4, f2(), 3).unwrap();
        assert!(LatticeFlag::new(vec![1, 2], vec![e1.clone(), e3.clone()]).is_err());
        assert!(LatticeFlag::new(vec![2, 1], vec![e1, e3]).is_ok());
    }

    #[test]
    fn identity_membership() {
        let id = perm(&[1, 2, 3]);
        let flag = LatticeFlag::standard(vec![1, 1, 1], 1, 4, f2()).unwrap();
        assert!(schubert_membership(&flag, &id, MembershipMode::Cell).unwrap());
        assert!(schubert_membership(&flag, &id, MembershipMode::Variety).unwrap());
        // the standard flag lies in the closed cell of a reflection, not the open one
        let s0 = perm(&[0, 2, 4]);
        let wflag = LatticeFlag::standard(vec![1, 1, 1], 0, 6, f2()).unwrap();
        assert!(!schubert_membership(&wflag, &s0, MembershipMode::Cell).unwrap());
        assert!(schubert_membership(&wflag, &s0, MembershipMode::Variety).unwrap());
    }

    #[test]
    fn membership_needs_window() {
        let p = perm(&[-2, 2, 6]);
        let flag = LatticeFlag::standard(vec![1, 1, 1], 1, 4, f2()).unwrap();
        assert!(matches!(
            schubert_membership(&flag, &p, MembershipMode::Variety),
            Err(Error::WindowTooSmall(_))
        ));
    }

    #[test]
    fn opposite_test_on_standard_flag() {
        let flag = LatticeFlag::standard(vec![1, 1, 1], -2, 4, f2()).unwrap();
        // E_i meets span(e_r : r < i + k) trivially iff k <= 0
        assert!(opposite_cell_test(&flag, 0).unwrap());
        assert!(!opposite_cell_test(&flag, 1).unwrap());
        assert!(matches!(
            opposite_cell_test(&flag, -3),
            Err(Error::WindowTooSmall(_))
        ));
    }

    #[test]
    fn default_window_examples() {
        let p = perm(&[-2, 2, 6]);
        assert_eq!(default_window(&p, &[1, 1, 1]).unwrap(), (-2, 4));
        let u = perm(&[-2, 5, 1, 4, 7]);
        assert_eq!(default_window(&u, &[2, 3]).unwrap(), (-2, 8));
        let id = perm(&[1, 2, 3]);
        assert_eq!(default_window(&id, &[1, 1, 1]).unwrap(), (1, 4));
    }

    #[test]
    fn subspace_generator_counts() {
        // Gaussian binomials: [4 choose 2]_2 = 35, [3 choose 1]_3 = 13
        assert_eq!(subspaces_of_dim(f2(), 4, 2).len(), 35);
        assert_eq!(subspaces_of_dim(Field::from_q(3).unwrap(), 3, 1).len(), 13);
        assert_eq!(subspaces_of_dim(f2(), 3, 0).len(), 1);
        assert_eq!(subspaces_of_dim(f2(), 3, 3).len(), 1);
        assert_eq!(subspaces_of_dim(f2(), 2, 3).len(), 0);
    }

    #[test]
    fn identity_cell_is_a_point() {
        let id = perm(&[1, 2, 3]);
        assert_eq!(
            enumerate_flag_points(&id, 2, MembershipMode::Cell, None).unwrap(),
            1
        );
        assert_eq!(
            enumerate_flag_points(&id, 3, MembershipMode::Variety, None).unwrap(),
            1
        );
    }

    #[test]
    fn simple_reflection_cells() {
        // each simple reflection bounds a projective line: q open, q+1 closed
        for w in [[2i64, 1, 3], [1, 3, 2], [0, 2, 4]] {
            let p = perm(&w);
            assert_eq!(p.length(), 1);
            for q in [2u64, 3] {
                let open = enumerate_flag_points(&p, q, MembershipMode::Cell, None).unwrap();
                let closed = enumerate_flag_points(&p, q, MembershipMode::Variety, None).unwrap();
                assert_eq!(open, q, "open cell of {:?} over F_{}", w, q);
                assert_eq!(closed, q + 1, "closed cell of {:?} over F_{}", w, q);
            }
        }
    }

    #[test]
    fn cell_counts_are_q_powers() {
        let rng = &mut Rng64::new(0x1a77_1ce5);
        let mut tried = 0;
        while tried < 12 {
            let n = 2 + (rng.below(3) as usize);
            let p = crate::sample::random_affine(rng, n, 1);
            if p.length() > 4 {
                continue;
            }
            tried += 1;
            let open = enumerate_flag_points(&p, 2, MembershipMode::Cell, None).unwrap();
            assert_eq!(open, 1u64 << p.length(), "cell of {:?}", p.window());
        }
    }

    #[test]
    fn closed_cell_count_frozen() {
        let p = perm(&[-2, 2, 6]);
        let pts = enumerate_flag_points(&p, 2, MembershipMode::Variety, None).unwrap();
        assert_eq!(pts, 63);
        let open = enumerate_flag_points(&p, 2, MembershipMode::Cell, None).unwrap();
        assert_eq!(open, 16);
    }

    #[test]
    fn closed_cell_is_union_of_open_cells() {
        // the closed cell splits as the disjoint union of the open cells of
        // the elements below p, so the point counts add up
        let p = perm(&[-2, 2, 6]);
        let closed = enumerate_flag_points(&p, 2, MembershipMode::Variety, None).unwrap();
        let mut total = 0u64;
        for w in bruhat_interval(&p).unwrap() {
            total += enumerate_flag_points(&w, 2, MembershipMode::Cell, None).unwrap();
        }
        assert_eq!(closed, total);
    }

    #[test]
    fn parabolic_counts() {
        // a minimal coset representative drives partial flags the same way
        let p = perm(&[2, 1, 3]);
        let open = enumerate_flag_points_with(&p, &[1, 2], 2, MembershipMode::Cell, None).unwrap();
        assert_eq!(open, 2);
        let closed =
            enumerate_flag_points_with(&p, &[1, 2], 2, MembershipMode::Variety, None).unwrap();
        assert_eq!(closed, 3);
    }

    #[test]
    fn enumerated_flags_pass_membership() {
        let p = perm(&[-2, 2, 6]);
        let flags = enumerate_flags(&p, &[1, 1, 1], 2, MembershipMode::Variety, None).unwrap();
        assert_eq!(flags.len(), 63);
        for f in &flags {
            assert!(schubert_membership(f, &p, MembershipMode::Variety).unwrap());
        }
        let set: std::collections::HashSet<_> = flags.iter().cloned().collect();
        assert_eq!(set.len(), 63);
    }

    #[test]
    fn guards_fire() {
        let p = perm(&[-2, 2, 6]);
        assert!(matches!(
            enumerate_flag_points(&p, 5, MembershipMode::Cell, None),
            Err(Error::GuardExceeded(_))
        ));
        let long = perm(&[-6, 2, 10]);
        assert!(long.length() > 8);
        assert!(matches!(
            enumerate_flag_points(&long, 2, MembershipMode::Cell, None),
            Err(Error::GuardExceeded(_))
        ));
    }
}
