//! From nilpotent matrices to lattices.
//!
//! A nilpotent n x n matrix N over k maps to a lattice on the window
//! [1, 1 + n(n+1)): the generator attached to the basis vector e_i stacks the
//! vectors N^{n-1} e_i, ..., N e_i, e_i into consecutive blocks of size n,
//! and the lattice is the t-closure of these generators. The Jordan type of
//! N is visible in the lattice through its incidence profile against the
//! chain of t-multiples of E_1, and conjugating N corresponds to acting on
//! the lattice blockwise. This gives an exact dictionary between conjugacy
//! classes of nilpotents and the profile strata of lattices sandwiched
//! between E_1 and t^n E_1.

use crate::error::{Error, Result};
use crate::field::Mat;
use crate::lattice::LatticeWindow;

/// A square matrix checked to satisfy N^n = 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NilpotentMatrix {
    mat: Mat,
}

impl NilpotentMatrix {
    pub fn new(mat: Mat) -> Result<NilpotentMatrix> {
        if mat.nr != mat.nc {
            return Err(Error::ShapeMismatch(format!(
                "nilpotent matrix must be square, got {}x{}",
                mat.nr, mat.nc
            )));
        }
        if !mat.pow(mat.nr).is_zero() {
            return Err(Error::NotNilpotent(format!(
                "matrix power {} is nonzero",
                mat.nr
            )));
        }
        Ok(NilpotentMatrix { mat })
    }

    pub fn n(&self) -> usize {
        self.mat.nr
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    /// Jordan block sizes, weakly decreasing. The rank drops
    /// d_k = rank N^{k-1} - rank N^k count blocks of size >= k, so the block
    /// sizes form the conjugate partition of the drop sequence.
    pub fn jordan_type(&self) -> Vec<usize> {
        let n = self.n();
        let mut drops = Vec::new();
        let mut prev = n; // rank of N^0
        for k in 1..=n {
            let r = self.mat.pow(k).rank();
            drops.push(prev - r);
            prev = r;
            if r == 0 {
                break;
            }
        }
        conjugate_partition(&drops)
    }
}

fn conjugate_partition(parts: &[usize]) -> Vec<usize> {
    let max = parts.iter().copied().max().unwrap_or(0);
    (1..=max)
        .map(|k| parts.iter().filter(|&&p| p >= k).count())
        .collect()
}

/// Lattice incidence target for a Jordan type: entry j - 1 is the expected
/// value of dim(L / L meet t^j E_1) for j = 1..n. Blocks of size b
/// contribute from level n - b + 1 on, one dimension per level.
pub fn cell_profile(jordan: &[usize], n: usize) -> Result<Vec<usize>> {
    let total: usize = jordan.iter().sum();
    if total != n || jordan.iter().any(|&b| b == 0 || b > n) {
        return Err(Error::ParameterOutOfRange(format!(
            "jordan type {jordan:?} is not a partition of {n}"
        )));
    }
    let mut blocks = jordan.to_vec();
    blocks.resize(n, 0);
    let offsets: Vec<usize> = blocks.iter().map(|&b| n - b).collect();
    Ok((1..=n)
        .map(|j| offsets.iter().map(|&c| j.saturating_sub(c)).sum())
        .collect())
}

fn phi_window(n: usize) -> (i64, i64) {
    (1, 1 + (n * (n + 1)) as i64)
}

/// The lattice of a nilpotent matrix, on the window [1, 1 + n(n+1)).
pub fn phi(nil: &NilpotentMatrix) -> Result<LatticeWindow> {
    let n = nil.n();
    let (lo, hi) = phi_window(n);
    let field = nil.mat.field;
    let width = (hi - lo) as usize;
    let mut powers = vec![Mat::identity(field, n)];
    for _ in 1..n {
        powers.push(powers.last().unwrap().mul(&nil.mat));
    }
    let mut cols = Mat::zeros(field, width, n);
    for i in 0..n {
        for r in 0..n {
            let p = &powers[n - 1 - r];
            for s in 0..n {
                cols.set(n * r + s, i, p.get(s, i).clone());
            }
        }
    }
    LatticeWindow::from_columns(n, lo, hi, &cols)
}

/// dim(L / L meet t^j E_1) for j = 1..n.
pub fn phi_profile(latt: &LatticeWindow) -> Result<Vec<usize>> {
    let n = latt.n();
    (1..=n)
        .map(|j| latt.codim_above(1 + (j * n) as i64))
        .collect()
}

/// Full image test for the lattice of a nilpotent matrix: sandwiched between
/// E_1 and t^n E_1, incidence profile matching the Jordan type, and trivial
/// intersection with the span of coordinates below 1 + n(n-1).
pub fn verify_phi_cell(nil: &NilpotentMatrix) -> Result<bool> {
    let n = nil.n();
    let latt = phi(nil)?;
    let (lo, hi) = phi_window(n);
    let floor = LatticeWindow::standard(n, lo, hi, latt.field(), 1 + (n * n) as i64)?;
    if !latt.contains(&floor)? {
        return Ok(false);
    }
    if phi_profile(&latt)? != cell_profile(&nil.jordan_type(), n)? {
        return Ok(false);
    }
    Ok(latt.dim_meet_prefix(1 + (n * (n - 1)) as i64)? == 0)
}

/// Applies an invertible n x n matrix to a lattice blockwise: the window is
/// cut into consecutive blocks of size n starting at lo, and g acts on each
/// block. For windows aligned so that lo = 1 mod n this is the t-linear
/// extension of g acting on k^n, hence sends lattices to lattices.
pub fn apply_block_diag(latt: &LatticeWindow, g: &Mat) -> Result<LatticeWindow> {
    let n = latt.n();
    if g.nr != n || g.nc != n {
        return Err(Error::ShapeMismatch(format!(
            "block action needs a {n}x{n} matrix, got {}x{}",
            g.nr, g.nc
        )));
    }
    if g.field != latt.field() {
        return Err(Error::FieldMismatch(
            "matrix and lattice live over different fields".into(),
        ));
    }
    if (1 - latt.lo()).rem_euclid(n as i64) != 0 {
        return Err(Error::IncompatibleWindows(format!(
            "window floor {} is not aligned to the block structure",
            latt.lo()
        )));
    }
    if g.inverse().is_none() {
        return Err(Error::ParameterOutOfRange(
            "block action needs an invertible matrix".into(),
        ));
    }
    let field = latt.field();
    let width = (latt.hi() - latt.lo()) as usize;
    let blocks = width / n;
    let mut rows = Vec::new();
    for row in latt.basis_rows() {
        let mut out = vec![field.zero(); width];
        for b in 0..blocks {
            for s in 0..n {
                let mut acc = field.zero();
                for u in 0..n {
                    let x = &row[b * n + u];
                    if !x.is_zero() {
                        acc = field.add(&acc, &field.mul(g.get(s, u), x));
                    }
                }
                out[b * n + s] = acc;
            }
        }
        rows.push(out);
    }
    let cols = Mat::from_rows(field, rows).transpose();
    LatticeWindow::from_columns(n, latt.lo(), latt.hi(), &cols)
}
