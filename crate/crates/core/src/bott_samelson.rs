//! Bott-Samelson diagrams: iterated plane fibrations over a reduced word.
//!
//! A reduced word sigma^j s_{l_1} ... s_{l_m} describes a tower built over
//! the standard lattice chain shifted by sigma^j. Reading the letters left
//! to right, letter l replaces the chain entry at position (l mod n) + 1 by
//! a free choice of lattice strictly between its two current neighbors
//! (cyclically, with a t-twist across the seam). Each choice ranges over
//! the lines of a two-dimensional quotient, so over F_q the tower has
//! exactly (q+1)^m points. Forgetting all but the chain entries at the
//! block starts of a composition projects a point onto a partial flag in
//! the closed cell of the word's evaluation.

use crate::affine_weyl::{evaluate_word, AffinePermutation, ReducedWord};
use crate::error::{Error, Result};
use crate::field::{Field, Mat, Scalar, Subspace};
use crate::lattice::{opposite_cell_test, LatticeFlag, LatticeWindow};

/// A lattice in a diagram: either a standard lattice E_j, or the value of
/// an earlier slot multiplied by t^shift.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NodeRef {
    Fixed(i64),
    Slot(usize, i64),
}

impl NodeRef {
    fn shifted(self, s: i64, n: usize) -> NodeRef {
        match self {
            NodeRef::Fixed(j) => NodeRef::Fixed(j + s * n as i64),
            NodeRef::Slot(k, s0) => NodeRef::Slot(k, s0 + s),
        }
    }
}

/// One free choice in the tower: a lattice strictly between `upper` and
/// `lower`, replacing chain position `chain_pos` (1-based) from then on.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SlotSpec {
    pub chain_pos: usize,
    pub upper: NodeRef,
    pub lower: NodeRef,
}

/// The incidence structure of the tower: one slot per letter, the chain
/// after all letters, and a window wide enough to hold every lattice any
/// point of the tower can produce.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BSDiagram {
    pub word: ReducedWord,
    pub eval: AffinePermutation,
    pub slots: Vec<SlotSpec>,
    pub final_chain: Vec<NodeRef>,
    pub lo: i64,
    pub hi: i64,
}

/// A point of the tower: the chosen lattice for each slot, in slot order.
pub type BsPoint = Vec<LatticeWindow>;

impl BSDiagram {
    pub fn n(&self) -> usize {
        self.word.n
    }

    /// Every containment the diagram imposes, as (larger, smaller) pairs;
    /// each slot sits under its upper neighbor and over its lower one.
    pub fn constraints(&self) -> Vec<(NodeRef, NodeRef)> {
        let mut out = Vec::with_capacity(2 * self.slots.len());
        for (k, slot) in self.slots.iter().enumerate() {
            out.push((slot.upper, NodeRef::Slot(k, 0)));
            out.push((NodeRef::Slot(k, 0), slot.lower));
        }
        out
    }
}

/// Containment bounds (lb, ub) with E_lb >= node >= E_ub, from the slot
/// bounds computed so far.
fn node_bounds(r: &NodeRef, slot_bounds: &[(i64, i64)], n: usize) -> (i64, i64) {
    match *r {
        NodeRef::Fixed(j) => (j, j),
        NodeRef::Slot(k, s) => {
            let (lb, ub) = slot_bounds[k];
            (lb + s * n as i64, ub + s * n as i64)
        }
    }
}

/// Builds the diagram for a reduced word by sweeping its letters over the
/// shifted standard chain. Rejects words whose letter count exceeds the
/// length of their evaluation.
pub fn build_bs(word: &ReducedWord) -> Result<BSDiagram> {
    let eval = evaluate_word(word)?;
    if eval.length() as usize != word.letters.len() {
        return Err(Error::WordNotReduced(format!(
            "{} letters but the evaluation has length {}",
            word.letters.len(),
            eval.length()
        )));
    }
    let n = word.n;
    let mut current: Vec<NodeRef> = (1..=n as i64)
        .map(|r| NodeRef::Fixed(r + word.sigma_power))
        .collect();
    let mut lo = 1 + word.sigma_power;
    let mut hi = n as i64 + word.sigma_power;
    let mut slots: Vec<SlotSpec> = Vec::with_capacity(word.letters.len());
    let mut slot_bounds: Vec<(i64, i64)> = Vec::with_capacity(word.letters.len());
    for &l in &word.letters {
        let rho = (l % n) + 1;
        let upper = if rho == 1 {
            current[n - 1].shifted(-1, n)
        } else {
            current[rho - 2]
        };
        let lower = if rho == n {
            current[0].shifted(1, n)
        } else {
            current[rho]
        };
        let ub = node_bounds(&upper, &slot_bounds, n);
        let lb = node_bounds(&lower, &slot_bounds, n);
        lo = lo.min(ub.0).min(lb.0);
        hi = hi.max(ub.1).max(lb.1);
        let k = slots.len();
        slots.push(SlotSpec {
            chain_pos: rho,
            upper,
            lower,
        });
        slot_bounds.push((ub.0, lb.1));
        current[rho - 1] = NodeRef::Slot(k, 0);
    }
    let rem = (hi - lo).rem_euclid(n as i64);
    if rem != 0 {
        hi += n as i64 - rem;
    }
    Ok(BSDiagram {
        word: word.clone(),
        eval,
        slots,
        final_chain: current,
        lo,
        hi,
    })
}

fn resolve(d: &BSDiagram, r: &NodeRef, field: Field, chosen: &[LatticeWindow]) -> Result<LatticeWindow> {
    match *r {
        NodeRef::Fixed(j) => LatticeWindow::standard(d.n(), d.lo, d.hi, field, j),
        NodeRef::Slot(k, s) => chosen[k].shift(s),
    }
}

fn check_guard(d: &BSDiagram, q: u64) -> Result<Field> {
    if d.slots.len() > 8 {
        return Err(Error::GuardExceeded(format!(
            "{} letters exceed enumeration guard 8",
            d.slots.len()
        )));
    }
    if q != 2 && q != 3 {
        return Err(Error::GuardExceeded(format!(
            "field size {q} outside enumeration guard {{2, 3}}"
        )));
    }
    Field::from_q(q)
}

/// All F_q points of the tower, depth first in slot order. Each slot is
/// enumerated as the lines of the quotient of its two neighbors; a quotient
/// that is not a plane aborts, since the fiber would not be a projective
/// line and the diagram was mis-derived.
pub fn enumerate_bs_points(d: &BSDiagram, q: u64) -> Result<Vec<BsPoint>> {
    let field = check_guard(d, q)?;
    let mut out = Vec::new();
    let mut chosen: BsPoint = Vec::with_capacity(d.slots.len());
    dfs(d, field, &mut chosen, &mut out)?;
    Ok(out)
}

fn dfs(d: &BSDiagram, field: Field, chosen: &mut BsPoint, out: &mut Vec<BsPoint>) -> Result<()> {
    let k = chosen.len();
    if k == d.slots.len() {
        out.push(chosen.clone());
        return Ok(());
    }
    let spec = &d.slots[k];
    let upper = resolve(d, &spec.upper, field, chosen)?;
    let lower = resolve(d, &spec.lower, field, chosen)?;
    if !upper.contains(&lower)? || upper.rel_dim(&lower)? != 2 {
        return Err(Error::FiberDimension(format!(
            "slot {k} spans a quotient of dimension {} instead of 2",
            upper.rel_dim(&lower).unwrap_or(0)
        )));
    }
    let m = (d.hi - d.lo) as usize;
    let up = Subspace::from_rows(field, m, upper.basis_rows());
    let low = Subspace::from_rows(field, m, lower.basis_rows());
    let reps = up.quotient_reps(&low);
    let mut lines: Vec<Vec<Scalar>> = Vec::new();
    for c in field.elements() {
        let v: Vec<Scalar> = reps[0]
            .iter()
            .zip(reps[1].iter())
            .map(|(x, y)| field.add(x, &field.mul(&c, y)))
            .collect();
        lines.push(v);
    }
    lines.push(reps[1].clone());
    for v in lines {
        let mut rows = lower.basis_rows();
        rows.push(v);
        let cols = Mat::from_rows(field, rows).transpose();
        let cand = LatticeWindow::from_columns(d.n(), d.lo, d.hi, &cols)?;
        chosen.push(cand);
        dfs(d, field, chosen, out)?;
        chosen.pop();
    }
    Ok(())
}

/// Point count by exhaustive enumeration; equals (q+1)^letters when the
/// diagram is well formed.
pub fn count_bs_points(d: &BSDiagram, q: u64) -> Result<u64> {
    Ok(enumerate_bs_points(d, q)?.len() as u64)
}

/// Forgets everything except the final chain entries at the block starts of
/// `composition`, after checking the point against every slot constraint.
pub fn project_bs(
    d: &BSDiagram,
    point: &[LatticeWindow],
    field: Field,
    composition: &[usize],
) -> Result<LatticeFlag> {
    if point.len() != d.slots.len() {
        return Err(Error::ArityMismatch {
            expected: d.slots.len(),
            got: point.len(),
        });
    }
    for (k, (spec, latt)) in d.slots.iter().zip(point.iter()).enumerate() {
        if latt.field() != field {
            return Err(Error::FieldMismatch(format!(
                "slot {k} lattice lives over a different field"
            )));
        }
        let upper = resolve(d, &spec.upper, field, &point[..k])?;
        let lower = resolve(d, &spec.lower, field, &point[..k])?;
        let above = upper.contains(latt)? && upper.rel_dim(latt)? == 1;
        let below = latt.contains(&lower)? && latt.rel_dim(&lower)? == 1;
        if !above || !below {
            return Err(Error::ConstraintViolation(format!(
                "slot {k} is not strictly between its neighbors"
            )));
        }
    }
    let mut picks = Vec::with_capacity(composition.len());
    let mut pos = 0usize;
    for &dj in composition {
        if pos >= d.n() {
            return Err(Error::CompositionInvalid(format!(
                "parts exceed rank {}",
                d.n()
            )));
        }
        picks.push(resolve(d, &d.final_chain[pos], field, point)?);
        pos += dj;
    }
    LatticeFlag::new(composition.to_vec(), picks)
}

/// Projections of every F_q point of the tower, one entry per point, in
/// enumeration order. With `opposite = Some(k)` only the points whose flag
/// is transversal to the opposite chain at offset k are kept.
pub fn project_all(
    d: &BSDiagram,
    q: u64,
    composition: &[usize],
    opposite: Option<i64>,
) -> Result<Vec<LatticeFlag>> {
    let field = check_guard(d, q)?;
    let mut out = Vec::new();
    for point in enumerate_bs_points(d, q)? {
        let flag = project_bs(d, &point, field, composition)?;
        if let Some(k) = opposite {
            if !opposite_cell_test(&flag, k)? {
                continue;
            }
        }
        out.push(flag);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_weyl::greedy_reduced_word;
    use crate::lattice::{enumerate_flags, schubert_membership, MembershipMode};
    use crate::sample::{random_affine, Rng64};
    use std::collections::{HashMap, HashSet};

    fn word(n: usize, sigma_power: i64, letters: Vec<usize>) -> ReducedWord {
        ReducedWord::new(n, sigma_power, letters).unwrap()
    }

    #[test]
    fn rejects_non_reduced_words() {
        let w = word(3, 0, vec![1, 1]);
        assert!(matches!(build_bs(&w), Err(Error::WordNotReduced(_))));
    }

    #[test]
    fn four_letter_diagram_structure() {
        let d = build_bs(&word(3, 0, vec![2, 1, 2, 0])).unwrap();
        assert_eq!(d.eval.window(), &[-2, 2, 6]);
        assert_eq!((d.lo, d.hi), (-2, 4));
        let expect = vec![
            SlotSpec { chain_pos: 3, upper: NodeRef::Fixed(2), lower: NodeRef::Fixed(4) },
            SlotSpec { chain_pos: 2, upper: NodeRef::Fixed(1), lower: NodeRef::Slot(0, 0) },
            SlotSpec { chain_pos: 3, upper: NodeRef::Slot(1, 0), lower: NodeRef::Fixed(4) },
            SlotSpec { chain_pos: 1, upper: NodeRef::Slot(2, -1), lower: NodeRef::Slot(1, 0) },
        ];
        assert_eq!(d.slots, expect);
        assert_eq!(
            d.final_chain,
            vec![NodeRef::Slot(3, 0), NodeRef::Slot(1, 0), NodeRef::Slot(2, 0)]
        );
        assert_eq!(d.constraints().len(), 8);
    }

    #[test]
    fn six_letter_diagram_window() {
        let d = build_bs(&word(5, 0, vec![1, 3, 4, 3, 0, 2])).unwrap();
        assert_eq!(d.eval.window(), &[-2, 5, 1, 4, 7]);
        assert_eq!((d.lo, d.hi), (-2, 8));
        let rho: Vec<usize> = d.slots.iter().map(|s| s.chain_pos).collect();
        assert_eq!(rho, vec![2, 4, 5, 4, 1, 3]);
    }

    #[test]
    fn empty_word_is_a_single_point() {
        let d = build_bs(&word(3, 2, vec![])).unwrap();
        assert_eq!(count_bs_points(&d, 2).unwrap(), 1);
        let field = Field::from_q(2).unwrap();
        let flag = project_bs(&d, &[], field, &[1, 1, 1]).unwrap();
        // the shifted standard chain E_3 >= E_4 >= E_5
        for (idx, latt) in flag.lattices.iter().enumerate() {
            let std =
                LatticeWindow::standard(3, d.lo, d.hi, field, 3 + idx as i64).unwrap();
            assert_eq!(latt, &std);
        }
    }

    #[test]
    fn counts_match_the_fibration_formula() {
        let d4 = build_bs(&word(3, 0, vec![2, 1, 2, 0])).unwrap();
        assert_eq!(count_bs_points(&d4, 2).unwrap(), 81);
        assert_eq!(count_bs_points(&d4, 3).unwrap(), 256);
        let d6 = build_bs(&word(5, 0, vec![1, 3, 4, 3, 0, 2])).unwrap();
        assert_eq!(count_bs_points(&d6, 2).unwrap(), 729);
    }

    #[test]
    fn projection_image_is_the_closed_cell() {
        let d = build_bs(&word(3, 0, vec![2, 1, 2, 0])).unwrap();
        let ones = vec![1usize, 1, 1];
        let flags = project_all(&d, 2, &ones, None).unwrap();
        assert_eq!(flags.len(), 81);
        let image: HashSet<LatticeFlag> = flags.into_iter().collect();
        let direct: HashSet<LatticeFlag> =
            enumerate_flags(&d.eval, &ones, 2, MembershipMode::Variety, None)
                .unwrap()
                .into_iter()
                .collect();
        assert_eq!(direct.len(), 63);
        assert_eq!(image, direct);
        let field = Field::from_q(2).unwrap();
        let std = LatticeFlag::standard(ones, d.lo, d.hi, field).unwrap();
        assert!(image.contains(&std));
    }

    #[test]
    fn generic_fibers_are_single_points() {
        let d = build_bs(&word(3, 0, vec![2, 1, 2, 0])).unwrap();
        let ones = vec![1usize, 1, 1];
        let mut fiber: HashMap<LatticeFlag, usize> = HashMap::new();
        for flag in project_all(&d, 2, &ones, None).unwrap() {
            *fiber.entry(flag).or_insert(0) += 1;
        }
        for flag in enumerate_flags(&d.eval, &ones, 2, MembershipMode::Cell, None).unwrap() {
            assert_eq!(fiber.get(&flag), Some(&1));
        }
    }

    #[test]
    fn opposite_filter_matches_direct_enumeration() {
        let d = build_bs(&word(3, 0, vec![2, 1, 2, 0])).unwrap();
        let ones = vec![1usize, 1, 1];
        let filtered: HashSet<LatticeFlag> =
            project_all(&d, 2, &ones, Some(0)).unwrap().into_iter().collect();
        let direct: HashSet<LatticeFlag> =
            enumerate_flags(&d.eval, &ones, 2, MembershipMode::Variety, Some(0))
                .unwrap()
                .into_iter()
                .collect();
        assert_eq!(filtered, direct);
        assert!(!filtered.is_empty());
        assert!(filtered.len() < 63);
    }

    #[test]
    fn random_words_count_and_project_correctly() {
        let mut rng = Rng64::new(0x9e3779b97f4a7c15);
        let mut tried = 0;
        while tried < 6 {
            let n = 2 + (rng.below(2) as usize);
            let p = random_affine(&mut rng, n, 2);
            let full = greedy_reduced_word(&p);
            let keep = full.letters.len().min(4);
            let w = ReducedWord::new(full.n, full.sigma_power, full.letters[..keep].to_vec())
                .unwrap();
            let d = match build_bs(&w) {
                Ok(d) => d,
                Err(_) => continue, // truncation of a greedy word is always reduced
            };
            let flags = project_all(&d, 2, &vec![1; n], None).unwrap();
            assert_eq!(flags.len(), 3usize.pow(keep as u32));
            for flag in &flags {
                assert!(
                    schubert_membership(flag, &d.eval, MembershipMode::Variety).unwrap()
                );
            }
            tried += 1;
        }
    }
}
