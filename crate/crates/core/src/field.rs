//! Exact scalar arithmetic over Q or a prime field, plus dense matrices and
//! canonical subspace representations used by the lattice models.

use crate::error::{Error, Result};
use num::rational::BigRational;
use num::{BigInt, One, Zero};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Rationals,
    Prime(u64),
}

impl Field {
    /// q = 0 selects the rationals, otherwise a prime modulus.
    pub fn from_q(q: u64) -> Result<Field> {
        match q {
            0 => Ok(Field::Rationals),
            q if is_prime(q) => Ok(Field::Prime(q)),
            q => Err(Error::ParameterOutOfRange(format!("q = {q} is not 0 or prime"))),
        }
    }

    pub fn zero(&self) -> Scalar {
        match self {
            Field::Rationals => Scalar::Rat(BigRational::zero()),
            Field::Prime(_) => Scalar::Fp(0),
        }
    }

    pub fn one(&self) -> Scalar {
        self.scalar(1)
    }

    pub fn scalar(&self, v: i64) -> Scalar {
        match self {
            Field::Rationals => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(q) => Scalar::Fp(v.rem_euclid(*q as i64) as u64),
        }
    }

    pub fn add(&self, x: &Scalar, y: &Scalar) -> Scalar {
        match (self, x, y) {
            (Field::Prime(q), Scalar::Fp(a), Scalar::Fp(b)) => Scalar::Fp((a + b) % q),
            (Field::Rationals, Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn sub(&self, x: &Scalar, y: &Scalar) -> Scalar {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &Scalar, y: &Scalar) -> Scalar {
        match (self, x, y) {
            (Field::Prime(q), Scalar::Fp(a), Scalar::Fp(b)) => {
                Scalar::Fp(((*a as u128 * *b as u128) % *q as u128) as u64)
            }
            (Field::Rationals, Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn neg(&self, x: &Scalar) -> Scalar {
        match (self, x) {
            (Field::Prime(q), Scalar::Fp(a)) => Scalar::Fp((q - a) % q),
            (Field::Rationals, Scalar::Rat(a)) => Scalar::Rat(-a),
            _ => panic!("scalar/field mismatch"),
        }
    }

    /// Multiplicative inverse; the caller must not pass zero.
    pub fn inv(&self, x: &Scalar) -> Scalar {
        match (self, x) {
            (Field::Prime(q), Scalar::Fp(a)) => {
                assert!(*a != 0, "inverse of zero");
                Scalar::Fp(mod_pow(*a, q - 2, *q))
            }
            (Field::Rationals, Scalar::Rat(a)) => {
                assert!(!a.is_zero(), "inverse of zero");
                Scalar::Rat(a.recip())
            }
            _ => panic!("scalar/field mismatch"),
        }
    }

    /// All field elements, for enumeration. Only finite fields support this.
    pub fn elements(&self) -> Vec<Scalar> {
        match self {
            Field::Prime(q) => (0..*q).map(Scalar::Fp).collect(),
            Field::Rationals => panic!("cannot enumerate an infinite field"),
        }
    }

    pub fn order(&self) -> Option<u64> {
        match self {
            Field::Prime(q) => Some(*q),
            Field::Rationals => None,
        }
    }
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc: u64 = 1 % modulus;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % modulus as u128) as u64;
        }
        base = ((base as u128 * base as u128) % modulus as u128) as u64;
        exp >>= 1;
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Fp(u64),
    Rat(BigRational),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Fp(a) => *a == 0,
            Scalar::Rat(a) => a.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Fp(a) => *a == 1,
            Scalar::Rat(a) => a.is_one(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Fp(a) => write!(f, "{a}"),
            Scalar::Rat(a) => {
                if a.denom().is_one() {
                    write!(f, "{}", a.numer())
                } else {
                    write!(f, "{}/{}", a.numer(), a.denom())
                }
            }
        }
    }
}

/// Dense row-major matrix over a fixed field.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat {
    pub field: Field,
    pub nr: usize,
    pub nc: usize,
    a: Vec<Scalar>,
}

impl Mat {
    pub fn zeros(field: Field, nr: usize, nc: usize) -> Mat {
        Mat { field, nr, nc, a: vec![field.zero(); nr * nc] }
    }

    pub fn identity(field: Field, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Mat {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        Mat { field, nr, nc, a: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(field: Field, rows: &[Vec<i64>]) -> Result<Mat> {
        let nc = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != nc) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(Mat::from_rows(
            field,
            rows.iter().map(|r| r.iter().map(|&v| field.scalar(v)).collect()).collect(),
        ))
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.a[r * self.nc + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.a[r * self.nc + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.a[r * self.nc..(r + 1) * self.nc]
    }

    pub fn rows_vec(&self) -> Vec<Vec<Scalar>> {
        (0..self.nr).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col(&self, c: usize) -> Vec<Scalar> {
        (0..self.nr).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut m = Mat::zeros(self.field, self.nc, self.nr);
        for r in 0..self.nr {
            for c in 0..self.nc {
                m.set(c, r, self.get(r, c).clone());
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.field, other.field, "field mismatch in mul");
        assert_eq!(self.nc, other.nr, "shape mismatch in mul");
        let f = self.field;
        let mut m = Mat::zeros(f, self.nr, other.nc);
        for r in 0..self.nr {
            for k in 0..self.nc {
                let x = self.get(r, k);
                if x.is_zero() {
                    continue;
                }
                for c in 0..other.nc {
                    let y = other.get(k, c);
                    if y.is_zero() {
                        continue;
                    }
                    let v = f.add(m.get(r, c), &f.mul(x, y));
                    m.set(r, c, v);
                }
            }
        }
        m
    }

    pub fn pow(&self, mut k: usize) -> Mat {
        assert_eq!(self.nr, self.nc, "pow of non-square matrix");
        let mut acc = Mat::identity(self.field, self.nr);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|v| v.is_zero())
    }

    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.field, other.field);
        assert_eq!(self.nc, other.nc, "vstack width mismatch");
        let mut a = self.a.clone();
        a.extend(other.a.iter().cloned());
        Mat { field: self.field, nr: self.nr + other.nr, nc: self.nc, a }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        row_reduce(&mut m, PivotOrder::Shallow).len()
    }

    /// Inverse of a square matrix; None when singular.
    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.nr, self.nc);
        let n = self.nr;
        let f = self.field;
        let mut aug = Mat::zeros(f, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, f.one());
        }
        let pivots = partial_reduce(&mut aug, &(0..n).collect::<Vec<_>>());
        if pivots.len() < n {
            return None;
        }
        let mut inv = Mat::zeros(f, n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, aug.get(r, n + c).clone());
            }
        }
        Some(inv)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PivotOrder {
    /// Pivots chosen at the smallest column index first.
    Shallow,
    /// Pivots chosen at the largest column index first.
    Deep,
}

/// Full row reduction in place. Returns the pivot columns in processing order;
/// after the call the first `pivots.len()` rows hold the reduced basis and the
/// remaining rows are zero. Rows end up sorted by ascending pivot column.
pub fn row_reduce(m: &mut Mat, order: PivotOrder) -> Vec<usize> {
    let cols: Vec<usize> = match order {
        PivotOrder::Shallow => (0..m.nc).collect(),
        PivotOrder::Deep => (0..m.nc).rev().collect(),
    };
    let mut pivots = partial_reduce(m, &cols);
    // normalize row order: ascending pivot column
    let mut idx: Vec<usize> = (0..pivots.len()).collect();
    idx.sort_by_key(|&i| pivots[i]);
    let sorted_rows: Vec<Vec<Scalar>> = idx.iter().map(|&i| m.row(i).to_vec()).collect();
    for (slot, row) in sorted_rows.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            m.set(slot, c, v);
        }
    }
    pivots.sort_unstable();
    pivots
}

/// Reduce using the given column processing order; only those columns produce
/// pivots, but elimination clears full rows. Returns pivot columns in
/// processing order, pivot row i stored at index i.
fn partial_reduce(m: &mut Mat, cols: &[usize]) -> Vec<usize> {
    let f = m.field;
    let mut pivots = Vec::new();
    let mut next = 0usize;
    for &c in cols {
        let mut hit = None;
        for r in next..m.nr {
            if !m.get(r, c).is_zero() {
                hit = Some(r);
                break;
            }
        }
        let Some(r0) = hit else { continue };
        if r0 != next {
            for cc in 0..m.nc {
                let tmp = m.get(r0, cc).clone();
                m.set(r0, cc, m.get(next, cc).clone());
                m.set(next, cc, tmp);
            }
        }
        let scale = f.inv(m.get(next, c));
        for cc in 0..m.nc {
            let v = f.mul(m.get(next, cc), &scale);
            m.set(next, cc, v);
        }
        for r in 0..m.nr {
            if r == next || m.get(r, c).is_zero() {
                continue;
            }
            let factor = m.get(r, c).clone();
            for cc in 0..m.nc {
                let v = f.sub(m.get(r, cc), &f.mul(&factor, m.get(next, cc)));
                m.set(r, cc, v);
            }
        }
        pivots.push(c);
        next += 1;
        if next == m.nr {
            break;
        }
    }
    pivots
}

/// A linear subspace of k^ambient in canonical form: the stored basis is the
/// reduced row echelon form with pivots pushed to the largest coordinate
/// indices, rows sorted by ascending pivot. Equal subspaces compare equal.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    pub field: Field,
    pub ambient: usize,
    mat: Mat,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn from_mat(m: &Mat) -> Subspace {
        let mut red = m.clone();
        let pivots = row_reduce(&mut red, PivotOrder::Deep);
        let rows: Vec<Vec<Scalar>> = (0..pivots.len()).map(|r| red.row(r).to_vec()).collect();
        let mat = if rows.is_empty() {
            // keep the ambient width even with no rows
            Mat::zeros(m.field, 0, m.nc)
        } else {
            Mat::from_rows(m.field, rows)
        };
        Subspace {
            field: m.field,
            ambient: m.nc,
            mat,
            pivots,
        }
    }

    pub fn from_rows(field: Field, ambient: usize, rows: Vec<Vec<Scalar>>) -> Subspace {
        if rows.is_empty() {
            return Subspace::zero(field, ambient);
        }
        Subspace::from_mat(&Mat::from_rows(field, rows))
    }

    pub fn zero(field: Field, ambient: usize) -> Subspace {
        Subspace { field, ambient, mat: Mat::zeros(field, 0, ambient), pivots: vec![] }
    }

    pub fn full(field: Field, ambient: usize) -> Subspace {
        Subspace::from_mat(&Mat::identity(field, ambient))
    }

    pub fn dim(&self) -> usize {
        self.mat.nr
    }

    pub fn basis(&self) -> &Mat {
        &self.mat
    }

    /// Deep pivots, ascending. Row i has its last nonzero entry at pivots[i].
    pub fn deep_pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// dim(self ∩ span(e_i : i < j)). Deep echelon rows with pivot < j span
    /// that intersection exactly.
    pub fn dim_meet_prefix(&self, j: usize) -> usize {
        self.pivots.iter().filter(|&&p| p < j).count()
    }

    /// Pivot columns of the shallow echelon form, ascending. Row with pivot p
    /// has support in [p, ambient), so dim(self ∩ span(e_i : i >= k)) equals
    /// the number of shallow pivots >= k.
    pub fn shallow_pivots(&self) -> Vec<usize> {
        let mut m = self.mat.clone();
        row_reduce(&mut m, PivotOrder::Shallow)
    }

    pub fn contains_vector(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let f = self.field;
        let mut w = v.to_vec();
        for (r, &p) in self.pivots.iter().enumerate() {
            if !w[p].is_zero() {
                let factor = w[p].clone();
                for (c, wc) in w.iter_mut().enumerate() {
                    *wc = f.sub(wc, &f.mul(&factor, self.mat.get(r, c)));
                }
            }
        }
        w.iter().all(|x| x.is_zero())
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient);
        (0..other.dim()).all(|r| self.contains_vector(other.mat.row(r)))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        assert_eq!(self.field, other.field);
        Subspace::from_mat(&self.mat.vstack(&other.mat))
    }

    pub fn dim_sum(&self, other: &Subspace) -> usize {
        self.mat.vstack(&other.mat).rank()
    }

    pub fn dim_meet(&self, other: &Subspace) -> usize {
        self.dim() + other.dim() - self.dim_sum(other)
    }

    /// Basis vectors of `self` modulo `sub` (which must lie inside `self`):
    /// rows of self reduced against an echelon seeded with sub's basis, the
    /// independent remainders kept in deterministic order.
    pub fn quotient_reps(&self, sub: &Subspace) -> Vec<Vec<Scalar>> {
        let f = self.field;
        let width = self.ambient;
        // (pivot col, normalized row)
        let mut ech: Vec<(usize, Vec<Scalar>)> = Vec::new();
        let insert = |ech: &mut Vec<(usize, Vec<Scalar>)>, v: &[Scalar]| -> Option<Vec<Scalar>> {
            let mut w = v.to_vec();
            for (p, row) in ech.iter() {
                if !w[*p].is_zero() {
                    let factor = w[*p].clone();
                    for c in 0..width {
                        w[c] = f.sub(&w[c], &f.mul(&factor, &row[c]));
                    }
                }
            }
            let pivot = (0..width).find(|&c| !w[c].is_zero())?;
            let scale = f.inv(&w[pivot]);
            for wc in w.iter_mut() {
                *wc = f.mul(wc, &scale);
            }
            ech.push((pivot, w.clone()));
            Some(w)
        };
        for r in 0..sub.dim() {
            insert(&mut ech, sub.mat.row(r));
        }
        let mut reps = Vec::new();
        for r in 0..self.dim() {
            if let Some(w) = insert(&mut ech, self.mat.row(r)) {
                reps.push(w);
            }
        }
        reps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Field {
        Field::Prime(2)
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = Field::Prime(5);
        let a = f.scalar(3);
        let b = f.scalar(4);
        assert_eq!(f.add(&a, &b), f.scalar(2));
        assert_eq!(f.mul(&a, &b), f.scalar(2));
        assert_eq!(f.mul(&a, &f.inv(&a)), f.one());
        assert_eq!(f.scalar(-1), f.scalar(4));
    }

    #[test]
    fn rational_arithmetic() {
        let f = Field::Rationals;
        let a = f.scalar(3);
        let half = f.inv(&f.scalar(2));
        assert_eq!(f.mul(&f.scalar(2), &half), f.one());
        assert_eq!(f.add(&a, &f.neg(&a)), f.zero());
    }

    #[test]
    fn q_validation() {
        assert!(Field::from_q(0).is_ok());
        assert!(Field::from_q(3).is_ok());
        assert!(Field::from_q(4).is_err());
        assert!(Field::from_q(1).is_err());
    }

    #[test]
    fn rank_and_inverse() {
        let f = Field::Prime(3);
        let m = Mat::from_i64(f, &[vec![1, 2, 0], vec![0, 1, 1], vec![1, 0, 2]]).unwrap();
        assert_eq!(m.rank(), 3);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(f, 3));
        let sing = Mat::from_i64(f, &[vec![1, 2], vec![2, 1]]).unwrap();
        // det = 1*1 - 2*2 = -3 = 0 mod 3
        assert_eq!(sing.rank(), 1);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn deep_canonical_form_is_unique() {
        let f = f2();
        let a = Subspace::from_mat(&Mat::from_i64(f, &[vec![1, 1, 0], vec![0, 1, 1]]).unwrap());
        let b = Subspace::from_mat(&Mat::from_i64(f, &[vec![1, 0, 1], vec![0, 1, 1]]).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
    }

    #[test]
    fn prefix_and_suffix_dimensions() {
        let f = f2();
        // span{e0+e3, e2} in k^4
        let u = Subspace::from_mat(&Mat::from_i64(
            f,
            &[vec![1, 0, 0, 1], vec![0, 0, 1, 0]],
        )
        .unwrap());
        assert_eq!(u.dim_meet_prefix(4), 2);
        assert_eq!(u.dim_meet_prefix(3), 1); // only e2
        assert_eq!(u.dim_meet_prefix(2), 0);
        let sp = u.shallow_pivots();
        // shallow pivots at columns 0 and 2; suffix dims: >=1 -> 1, >=3 -> 0
        assert_eq!(sp, vec![0, 2]);
    }

    #[test]
    fn quotient_reps_count() {
        let f = f2();
        let big = Subspace::full(f, 3);
        let small = Subspace::from_mat(&Mat::from_i64(f, &[vec![0, 0, 1]]).unwrap());
        let reps = big.quotient_reps(&small);
        assert_eq!(reps.len(), 2);
        let rebuilt = Subspace::from_rows(f, 3, {
            let mut rows = reps;
            rows.push(vec![f.zero(), f.zero(), f.one()]);
            rows
        });
        assert_eq!(rebuilt, big);
    }

    #[test]
    fn sum_and_meet_dims() {
        let f = Field::Rationals;
        let u = Subspace::from_mat(&Mat::from_i64(f, &[vec![1, 0, 0], vec![0, 1, 0]]).unwrap());
        let v = Subspace::from_mat(&Mat::from_i64(f, &[vec![0, 1, 0], vec![0, 0, 1]]).unwrap());
        assert_eq!(u.dim_sum(&v), 3);
        assert_eq!(u.dim_meet(&v), 1);
        assert!(u.sum(&v).contains(&Subspace::full(f, 3)));
    }
}
