//! Circular complexes on two spaces and their two-step lattice flags.
//!
//! A circular complex is a pair of maps X : U -> W and Y : W -> U with
//! XY = 0 and YX = 0, where dim U = a, dim W = b, a <= b. These are
//! exactly the representations of the two-node cyclic quiver killed by
//! every composite of two arrows, and they form a variety whose components
//! are indexed by rank X. This module builds the associated lattice flag
//! directly in a three-period window, checks the incidence conditions
//! cutting out its image, and produces for each component label c the
//! explicit affine permutation pi_c together with a reduced word for it
//! organized into six rectangular cables.

use crate::affine_weyl::{AffinePermutation, ReducedWord};
use crate::cyclic_quiver::QuiverRep;
use crate::error::{Error, Result};
use crate::field::{Field, Mat, Scalar};
use crate::lattice::{LatticeFlag, LatticeWindow};
use crate::sample::{random_invertible, random_matrix, Rng64};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CircularComplex {
    a: usize,
    b: usize,
    x: Mat, // b x a
    y: Mat, // a x b
}

impl CircularComplex {
    pub fn new(x: Mat, y: Mat) -> Result<CircularComplex> {
        let a = x.nc;
        let b = x.nr;
        if a == 0 || a > b {
            return Err(Error::ParameterOutOfRange(format!(
                "need 1 <= a <= b, got a = {a}, b = {b}"
            )));
        }
        if y.nr != a || y.nc != b {
            return Err(Error::ShapeMismatch(format!(
                "second map must be {a}x{b}, got {}x{}",
                y.nr, y.nc
            )));
        }
        if x.field != y.field {
            return Err(Error::FieldMismatch(
                "both maps must live over one field".into(),
            ));
        }
        if !x.mul(&y).is_zero() || !y.mul(&x).is_zero() {
            return Err(Error::NotAComplex(
                "the two composites must vanish".into(),
            ));
        }
        Ok(CircularComplex { a, b, x, y })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn n(&self) -> usize {
        self.a + self.b
    }

    pub fn x(&self) -> &Mat {
        &self.x
    }

    pub fn y(&self) -> &Mat {
        &self.y
    }

    pub fn field(&self) -> Field {
        self.x.field
    }

    /// The same data as a two-node cyclic quiver representation.
    pub fn to_quiver_rep(&self) -> QuiverRep {
        QuiverRep::new(vec![self.a, self.b], vec![self.x.clone(), self.y.clone()])
            .expect("a circular complex is nilpotent")
    }

    /// Ranks of the two maps; their orbit is determined by this pair.
    pub fn orbit_ranks(&self) -> (usize, usize) {
        (self.x.rank(), self.y.rank())
    }

    /// The orbit is dense in its component exactly when the kernel of X is
    /// filled by the image of Y.
    pub fn is_open(&self) -> bool {
        let (rx, ry) = self.orbit_ranks();
        rx + ry == self.a
    }
}

/// The two-step flag of a circular complex on the window of three periods:
/// the first lattice is spanned by Xu + tu and tw, the second by
/// t(Yw + w) and t^2 u, over basis vectors u of U and w of W. Both
/// complex conditions are exactly what makes this a flag.
pub fn psi_circular(cx: &CircularComplex) -> Result<LatticeFlag> {
    let (a, b, n) = (cx.a, cx.b, cx.n());
    let field = cx.field();
    let (lo, hi) = (1i64, 1 + 3 * n as i64);
    let width = 3 * n;
    let mut col_1: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    for i in 0..a {
        let mut v = vec![field.zero(); width];
        for r in 0..b {
            v[a + r] = cx.x.get(r, i).clone();
        }
        v[n + i] = field.one();
        col_1.push(v);
    }
    for i in 0..b {
        let mut v = vec![field.zero(); width];
        v[n + a + i] = field.one();
        col_1.push(v);
    }
    let mut col_2: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    for i in 0..b {
        let mut v = vec![field.zero(); width];
        for r in 0..a {
            v[n + r] = cx.y.get(r, i).clone();
        }
        v[n + a + i] = field.one();
        col_2.push(v);
    }
    for i in 0..a {
        let mut v = vec![field.zero(); width];
        v[2 * n + i] = field.one();
        col_2.push(v);
    }
    let l1 = LatticeWindow::from_columns(n, lo, hi, &Mat::from_rows(field, col_1).transpose())?;
    let l2 = LatticeWindow::from_columns(n, lo, hi, &Mat::from_rows(field, col_2).transpose())?;
    LatticeFlag::new(vec![a, b], vec![l1, l2])
}

/// The five incidence conditions cutting out the component with label c
/// inside the space of two-step flags, checked on the window of two periods
/// starting right below the first chain index:
/// the first lattice sits between the chain steps at a+1 and n+a+1 with
/// codimensions b and a, the second between n+1 and 2n+1 with codimensions
/// a and b, both meet the visible span below their inner step trivially,
/// and the two inner incidence numbers are c and a - c.
pub fn circular_conditions(flag: &LatticeFlag, c: usize) -> Result<bool> {
    if flag.composition.len() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            got: flag.composition.len(),
        });
    }
    let (a, b) = (flag.composition[0], flag.composition[1]);
    let n = a + b;
    if c > a {
        return Err(Error::ParameterOutOfRange(format!(
            "label {c} exceeds a = {a}"
        )));
    }
    let (lo, hi) = (a as i64 + 1, a as i64 + 1 + 2 * n as i64);
    let field = flag.lattices[0].field();
    let l1 = flag.lattices[0].rewindow(lo, hi)?;
    let l2 = flag.lattices[1].rewindow(lo, hi)?;
    let e2 = LatticeWindow::standard(n, lo, hi, field, a as i64 + 1)?;
    let e3 = LatticeWindow::standard(n, lo, hi, field, n as i64 + 1)?;
    let e4 = LatticeWindow::standard(n, lo, hi, field, (n + a) as i64 + 1)?;
    let e5 = LatticeWindow::standard(n, lo, hi, field, 2 * n as i64 + 1)?;
    let sandwich = e2.contains(&l1)?
        && e2.rel_dim(&l1)? == b
        && l1.contains(&e4)?
        && l1.rel_dim(&e4)? == a
        && e3.contains(&l2)?
        && e3.rel_dim(&l2)? == a
        && l2.contains(&e5)?
        && l2.rel_dim(&e5)? == b;
    if !sandwich {
        return Ok(false);
    }
    let vanishing =
        l1.dim_meet_prefix(n as i64 + 1)? == 0 && l2.dim_meet_prefix((n + a) as i64 + 1)? == 0;
    if !vanishing {
        return Ok(false);
    }
    Ok(l1.codim_above(n as i64 + 1)? == c && l2.codim_above((n + a) as i64 + 1)? == a - c)
}

/// The normal form of the dense orbit in the component with label c, pinned
/// so that its flag lies in the open cell of pi_c: X sends the last c basis
/// vectors of U onto the first c of W, Y sends the last a - c of W onto the
/// first a - c of U.
pub fn standard_open_point(field: Field, a: usize, b: usize, c: usize) -> Result<CircularComplex> {
    if a == 0 || a > b || c > a {
        return Err(Error::ParameterOutOfRange(format!(
            "need 1 <= a <= b and c <= a, got ({a}, {b}, {c})"
        )));
    }
    let mut x = Mat::zeros(field, b, a);
    for i in 0..c {
        x.set(i, a - c + i, field.one());
    }
    let mut y = Mat::zeros(field, a, b);
    for j in 0..(a - c) {
        y.set(j, b - (a - c) + j, field.one());
    }
    CircularComplex::new(x, y)
}

/// A random complex whose orbit is dense in the component with label c:
/// X has rank c and Y fills the rest of the kernel of X.
pub fn random_open_point(
    rng: &mut Rng64,
    field: Field,
    a: usize,
    b: usize,
    c: usize,
) -> Result<CircularComplex> {
    if a == 0 || a > b || c > a {
        return Err(Error::ParameterOutOfRange(format!(
            "need 1 <= a <= b and c <= a, got ({a}, {b}, {c})"
        )));
    }
    let mut dx = Mat::zeros(field, b, a);
    for i in 0..c {
        dx.set(i, i, field.one());
    }
    let mut r = Mat::zeros(field, a - c, b - c);
    while r.rank() < a - c {
        r = random_matrix(rng, field, a - c, b - c);
    }
    let mut dy = Mat::zeros(field, a, b);
    for i in 0..(a - c) {
        for j in 0..(b - c) {
            dy.set(c + i, c + j, r.get(i, j).clone());
        }
    }
    let p = random_invertible(rng, field, b);
    let q = random_invertible(rng, field, a);
    let x = p.mul(&dx).mul(&q);
    let y = q
        .inverse()
        .expect("invertible by construction")
        .mul(&dy)
        .mul(&p.inverse().expect("invertible by construction"));
    CircularComplex::new(x, y)
}

/// The affine permutation labelling the component with rank X = c: its
/// window is read off blockwise from five value intervals.
pub fn pi_c(a: usize, b: usize, c: usize) -> Result<AffinePermutation> {
    if a == 0 || a > b || c > a {
        return Err(Error::ParameterOutOfRange(format!(
            "need 1 <= a <= b and c <= a, got ({a}, {b}, {c})"
        )));
    }
    let (a, b, c) = (a as i64, b as i64, c as i64);
    let mut window: Vec<i64> = Vec::with_capacity((a + b) as usize);
    window.extend(a + 1..=a + c);
    window.extend(a + 2 * b + c + 1..=2 * a + 2 * b);
    window.extend(a + b + 1..=2 * a + b - c);
    window.extend(2 * a + b + c + 1..=a + 2 * b + c);
    window.extend(3 * a + 2 * b - c + 1..=3 * a + 2 * b);
    AffinePermutation::new(window)
}

/// The six rectangles of the cable word for pi_c: base position and the two
/// side lengths of each rectangle. A rectangle (i, j, k) stands for the
/// crossing of a j-wire cable over a k-wire cable on positions i+1..i+j+k.
pub fn cable_factors(a: usize, b: usize, c: usize) -> Vec<(usize, usize, usize)> {
    vec![
        (0, c, a - c),
        (a, b - a, c),
        (b, a - c, c),
        (a, a - c, b - a),
        (b + a - c, c, c),
        (c, a - c, a - c),
    ]
}

/// A reduced word for pi_c of length ab: one period of rotation followed by
/// six rectangular cables. Within each rectangle the letters are laid out
/// along antidiagonal layers, each layer fully commutative.
pub fn cable_word(a: usize, b: usize, c: usize) -> Result<ReducedWord> {
    if a == 0 || a > b || c > a {
        return Err(Error::ParameterOutOfRange(format!(
            "need 1 <= a <= b and c <= a, got ({a}, {b}, {c})"
        )));
    }
    let n = a + b;
    let mut letters = Vec::with_capacity(a * b);
    for (base, j, k) in cable_factors(a, b, c) {
        letters.extend(cable_rectangle(n, base, j, k));
    }
    ReducedWord::new(n, n as i64, letters)
}

fn cable_rectangle(n: usize, base: usize, j: usize, k: usize) -> Vec<usize> {
    let mut letters = Vec::with_capacity(j * k);
    if j == 0 || k == 0 {
        return letters;
    }
    for t in 1..=(j + k - 1) {
        let v_hi = k.min(j + k - t);
        let v_lo = 1.max(k as i64 - t as i64 + 1) as usize;
        for v in (v_lo..=v_hi).rev() {
            let letter = (base as i64 + t as i64 - k as i64 + 2 * v as i64 - 1)
                .rem_euclid(n as i64) as usize;
            letters.push(letter);
        }
    }
    letters
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_weyl::{
        bruhat_leq, evaluate_word, min_coset_rep_right, parabolic_generators,
    };
    use crate::cyclic_quiver::{orbit_permutation, psi};
    use crate::lattice::{schubert_membership, MembershipMode};

    fn f2() -> Field {
        Field::from_q(2).unwrap()
    }

    fn from_entries(field: Field, rows: &[Vec<i64>]) -> Mat {
        Mat::from_i64(field, rows).unwrap()
    }

    #[test]
    fn rejects_non_complexes() {
        let field = f2();
        // YX != 0: both maps the 1x1 identity
        let x = from_entries(field, &[vec![1]]);
        let y = from_entries(field, &[vec![1]]);
        assert!(matches!(
            CircularComplex::new(x, y),
            Err(Error::NotAComplex(_))
        ));
        let x = from_entries(field, &[vec![1], vec![0]]);
        let y = from_entries(field, &[vec![0, 1], vec![0, 0]]);
        assert!(matches!(
            CircularComplex::new(x, y),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn small_flag_frozen() {
        // a = b = 1, X = 1, Y = 0: the first lattice is spanned by
        // e_2 + e_3 and everything from e_4 on, the second is standard
        let field = f2();
        let cx = CircularComplex::new(
            from_entries(field, &[vec![1]]),
            from_entries(field, &[vec![0]]),
        )
        .unwrap();
        let flag = psi_circular(&cx).unwrap();
        let l1 = &flag.lattices[0];
        assert_eq!(l1.dim_window(), 4);
        assert_eq!(l1.codim_above(3).unwrap(), 1); // rank X
        assert_eq!(l1.dim_meet_prefix(3).unwrap(), 0);
        let e4 = LatticeWindow::standard(2, 1, 7, field, 4).unwrap();
        assert_eq!(flag.lattices[1], e4);
        assert!(circular_conditions(&flag, 1).unwrap());
        assert!(!circular_conditions(&flag, 0).unwrap());
    }

    #[test]
    fn direct_flag_matches_quiver_flag() {
        let rng = &mut Rng64::new(41);
        for q in [2u64, 3] {
            let field = Field::from_q(q).unwrap();
            for (a, b) in [(1usize, 1usize), (1, 2), (2, 2), (2, 3)] {
                for c in 0..=a {
                    let cx = random_open_point(rng, field, a, b, c).unwrap();
                    let n = cx.n();
                    let direct = psi_circular(&cx).unwrap();
                    let via_quiver = psi(&cx.to_quiver_rep()).unwrap();
                    for j in 0..2 {
                        let shifted = via_quiver.lattices[j]
                            .shift(-(n as i64) + 2)
                            .unwrap()
                            .rewindow(1, 1 + 3 * n as i64)
                            .unwrap();
                        assert_eq!(shifted, direct.lattices[j], "({a},{b},{c}) step {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn open_points_satisfy_conditions_tightly() {
        let rng = &mut Rng64::new(99);
        for (a, b) in [(1usize, 1usize), (1, 3), (2, 2), (2, 3), (3, 3)] {
            for c in 0..=a {
                let cx = random_open_point(rng, f2(), a, b, c).unwrap();
                assert_eq!(cx.orbit_ranks(), (c, a - c));
                assert!(cx.is_open());
                let flag = psi_circular(&cx).unwrap();
                assert!(circular_conditions(&flag, c).unwrap(), "({a},{b},{c})");
                for wrong in 0..=a {
                    if wrong != c {
                        assert!(!circular_conditions(&flag, wrong).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn component_window_frozen() {
        assert_eq!(pi_c(2, 3, 1).unwrap().window(), &[3, 10, 6, 9, 12]);
        // degenerate labels at both ends
        assert_eq!(pi_c(1, 1, 0).unwrap().window(), &[4, 3]);
        assert_eq!(pi_c(1, 1, 1).unwrap().window(), &[2, 5]);
    }

    #[test]
    fn component_length_and_descents() {
        for a in 1..=4usize {
            for b in a..=4 {
                let n = a + b;
                for c in 0..=a {
                    let p = pi_c(a, b, c).unwrap();
                    assert_eq!(p.length(), (a * b) as u64, "({a},{b},{c})");
                    // minimal in its right coset, and the longest element
                    // among the right-minimal representatives of its double
                    // coset: pushing any parabolic generator in from the
                    // left never escapes upward
                    let composition = [a, b];
                    for i in parabolic_generators(&composition) {
                        assert!(!p.is_right_descent(i), "({a},{b},{c}) right {i}");
                        let s = AffinePermutation::simple_reflection(n, i).unwrap();
                        let moved = min_coset_rep_right(&s.compose(&p).unwrap(), &composition);
                        assert!(
                            bruhat_leq(&moved, &p).unwrap(),
                            "({a},{b},{c}) left {i}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cable_word_frozen_and_evaluates() {
        let w = cable_word(2, 3, 1).unwrap();
        assert_eq!(w.sigma_power, 5);
        assert_eq!(w.letters, vec![1, 3, 4, 3, 0, 2]);
        for a in 1..=4usize {
            for b in a..=4 {
                for c in 0..=a {
                    let w = cable_word(a, b, c).unwrap();
                    assert_eq!(w.letters.len(), a * b);
                    assert_eq!(evaluate_word(&w).unwrap(), pi_c(a, b, c).unwrap());
                }
            }
        }
    }

    #[test]
    fn cable_layers_commute() {
        // letters within one antidiagonal layer are pairwise non-adjacent,
        // so each layer is a product of commuting reflections
        for (a, b, c) in [(2usize, 3usize, 1usize), (3, 4, 2), (2, 2, 0), (4, 4, 2)] {
            let n = a + b;
            for (base, j, k) in cable_factors(a, b, c) {
                if j == 0 || k == 0 {
                    continue;
                }
                let letters = super::cable_rectangle(n, base, j, k);
                let mut pos = 0usize;
                for t in 1..=(j + k - 1) {
                    let count = k.min(j + k - t) - 1.max(k as i64 - t as i64 + 1) as usize + 1;
                    let layer = &letters[pos..pos + count];
                    pos += count;
                    for p in 0..layer.len() {
                        for q in p + 1..layer.len() {
                            let d = (layer[p] as i64 - layer[q] as i64).rem_euclid(n as i64);
                            assert!(d != 1 && d != n as i64 - 1, "adjacent letters in a layer");
                        }
                    }
                }
                assert_eq!(pos, letters.len());
            }
        }
    }

    #[test]
    fn open_flags_lie_in_component_cells() {
        let rng = &mut Rng64::new(7);
        for (a, b) in [(1usize, 1usize), (1, 2), (2, 3), (2, 2)] {
            for c in 0..=a {
                let p = pi_c(a, b, c).unwrap();
                // the pinned normal form sits in the open cell itself
                let std_flag = psi_circular(&standard_open_point(f2(), a, b, c).unwrap()).unwrap();
                assert!(
                    schubert_membership(&std_flag, &p, MembershipMode::Cell).unwrap(),
                    "cell ({a},{b},{c})"
                );
                // every open point stays inside the closure, and its quiver
                // cell label is the same window pushed down by the periods
                // separating the two constructions
                let cx = random_open_point(rng, f2(), a, b, c).unwrap();
                let n = cx.n();
                let flag = psi_circular(&cx).unwrap();
                assert!(
                    schubert_membership(&flag, &p, MembershipMode::Variety).unwrap(),
                    "variety ({a},{b},{c})"
                );
                let label = orbit_permutation(&cx.to_quiver_rep()).unwrap();
                let pushed: Vec<i64> = p
                    .window()
                    .iter()
                    .map(|v| v + (n * (n - 2)) as i64)
                    .collect();
                assert_eq!(label.window(), &pushed[..], "label ({a},{b},{c})");
            }
        }
    }

}
