//! The extended affine symmetric group in window coordinates.
//!
//! An element is a bijection p of the integers with p(i + n) = p(i) + n,
//! stored through its window [p(1), ..., p(n)]. Composition is composition of
//! functions: (p * q)(i) = p(q(i)), so words multiply on the right.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

pub fn imod(a: i64, n: i64) -> i64 {
    a.rem_euclid(n)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffinePermutation {
    n: usize,
    window: Vec<i64>,
}

impl fmt::Display for AffinePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.window.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for AffinePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Integer translation part t^c; c_i records how many periods index i moves.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TranslationVector {
    pub c: Vec<i64>,
}

impl AffinePermutation {
    pub fn new(window: Vec<i64>) -> Result<AffinePermutation> {
        let n = window.len();
        if n == 0 {
            return Err(Error::ArityMismatch { expected: 1, got: 0 });
        }
        let ni = n as i64;
        for i in 0..n {
            for j in (i + 1)..n {
                if imod(window[i], ni) == imod(window[j], ni) {
                    return Err(Error::ResidueCollision { a: window[i], b: window[j], n });
                }
            }
        }
        Ok(AffinePermutation { n, window })
    }

    pub fn identity(n: usize) -> AffinePermutation {
        AffinePermutation { n, window: (1..=n as i64).collect() }
    }

    /// The rotation with window [2, 3, ..., n+1].
    pub fn sigma(n: usize) -> AffinePermutation {
        Self::sigma_pow(n, 1)
    }

    pub fn sigma_pow(n: usize, j: i64) -> AffinePermutation {
        AffinePermutation { n, window: (1..=n as i64).map(|i| i + j).collect() }
    }

    /// s_i for i in [0, n-1]; s_0 is the wrap-around transposition.
    pub fn simple_reflection(n: usize, i: usize) -> Result<AffinePermutation> {
        if i >= n {
            return Err(Error::LetterOutOfRange(format!("letter {i} with n = {n}")));
        }
        let mut w: Vec<i64> = (1..=n as i64).collect();
        if i == 0 {
            w[0] = 0;
            w[n - 1] = n as i64 + 1;
        } else {
            w.swap(i - 1, i);
        }
        Ok(AffinePermutation { n, window: w })
    }

    pub fn translation(c: &TranslationVector) -> AffinePermutation {
        let n = c.c.len();
        AffinePermutation {
            n,
            window: (0..n).map(|i| (i as i64 + 1) + n as i64 * c.c[i]).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> &[i64] {
        &self.window
    }

    pub fn apply(&self, i: i64) -> i64 {
        let ni = self.n as i64;
        let r = imod(i - 1, ni); // 0-based residue
        let offset = (i - 1 - r) / ni;
        self.window[r as usize] + ni * offset
    }

    /// (self * other)(i) = self(other(i)).
    pub fn compose(&self, other: &AffinePermutation) -> Result<AffinePermutation> {
        if self.n != other.n {
            return Err(Error::RankMismatch(format!("n = {} vs {}", self.n, other.n)));
        }
        Ok(AffinePermutation {
            n: self.n,
            window: (1..=self.n as i64).map(|i| self.apply(other.apply(i))).collect(),
        })
    }

    pub fn inverse(&self) -> AffinePermutation {
        let ni = self.n as i64;
        let mut window = vec![0i64; self.n];
        for r in 1..=ni {
            let v = self.window[(r - 1) as usize];
            // self maps r + tn to v + tn, so the inverse sends the residue
            // class of v back to r with the matching offset.
            let res = imod(v - 1, ni);
            let t = (res + 1 - v) / ni;
            window[res as usize] = r + t * ni;
        }
        AffinePermutation { n: self.n, window }
    }

    /// Finite part and translation part: self = finite * t^c with the finite
    /// part's window a permutation of 1..n.
    pub fn decompose(&self) -> (AffinePermutation, TranslationVector) {
        let ni = self.n as i64;
        let mut bar = Vec::with_capacity(self.n);
        let mut c = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let v = self.window[i];
            let b = imod(v - 1, ni) + 1;
            bar.push(b);
            c.push((v - b) / ni);
        }
        (AffinePermutation { n: self.n, window: bar }, TranslationVector { c })
    }

    /// Coxeter length: sum over window pairs i < j of |floor((p(j)-p(i))/n)|.
    pub fn length(&self) -> u64 {
        let ni = self.n as i64;
        let mut total: u64 = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                total += (self.window[j] - self.window[i]).div_euclid(ni).unsigned_abs();
            }
        }
        total
    }

    /// Net window displacement divided by n; the rotation sigma has component
    /// index 1 and simple reflections have index 0.
    pub fn component_index(&self) -> i64 {
        let s: i64 = self
            .window
            .iter()
            .enumerate()
            .map(|(i, v)| v - (i as i64 + 1))
            .sum();
        s / self.n as i64
    }

    pub fn is_right_descent(&self, i: usize) -> bool {
        assert!(i < self.n);
        if i == 0 {
            self.apply(0) > self.window[0]
        } else {
            self.window[i - 1] > self.window[i]
        }
    }

    /// Count of m >= i with self(m) < j.
    pub fn count_escape(&self, i: i64, j: i64) -> u64 {
        let ni = self.n as i64;
        let mut total = 0u64;
        for r in 1..=ni {
            let v = self.window[(r - 1) as usize];
            // m = r + t*n >= i  and  self(m) = v + t*n <= j-1
            let a = (i - r + ni - 1).div_euclid(ni); // ceil((i-r)/n)
            let b = (j - 1 - v).div_euclid(ni); // floor
            if b >= a {
                total += (b - a + 1) as u64;
            }
        }
        total
    }

    pub fn cmp_window(&self, other: &AffinePermutation) -> Ordering {
        self.window.cmp(&other.window)
    }
}

impl TranslationVector {
    pub fn new(c: Vec<i64>) -> TranslationVector {
        TranslationVector { c }
    }

    /// Length of t^c: sum over pairs of |c_i - c_j|.
    pub fn length(&self) -> u64 {
        let mut total = 0u64;
        for i in 0..self.c.len() {
            for j in (i + 1)..self.c.len() {
                total += (self.c[i] - self.c[j]).unsigned_abs();
            }
        }
        total
    }

    /// Pairing of the descending rearrangement with (n-1, n-3, ..., 1-n).
    pub fn dominant_pairing(&self) -> i64 {
        let n = self.c.len() as i64;
        let mut d = self.c.clone();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d.iter()
            .enumerate()
            .map(|(i, v)| v * (n - 1 - 2 * i as i64))
            .sum()
    }
}

/// Parse "[a,b,c]" (brackets optional) into a window of the expected arity.
pub fn parse_window(text: &str, n: usize) -> Result<AffinePermutation> {
    let t = text.trim().trim_start_matches('[').trim_end_matches(']');
    let mut vals = Vec::new();
    if !t.trim().is_empty() {
        for part in t.split(',') {
            vals.push(
                part.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::BadInput(format!("cannot parse entry {:?}", part.trim())))?,
            );
        }
    }
    if vals.len() != n {
        return Err(Error::ArityMismatch { expected: n, got: vals.len() });
    }
    AffinePermutation::new(vals)
}

/// A word sigma^sigma_power * s_{l1} * ... * s_{lk} with letters in [0, n-1].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReducedWord {
    pub n: usize,
    pub sigma_power: i64,
    pub letters: Vec<usize>,
}

impl ReducedWord {
    pub fn new(n: usize, sigma_power: i64, letters: Vec<usize>) -> Result<ReducedWord> {
        if let Some(&bad) = letters.iter().find(|&&l| l >= n) {
            return Err(Error::LetterOutOfRange(format!("letter {bad} with n = {n}")));
        }
        Ok(ReducedWord { n, sigma_power, letters })
    }
}

pub fn evaluate_word(w: &ReducedWord) -> Result<AffinePermutation> {
    let mut p = AffinePermutation::sigma_pow(w.n, w.sigma_power);
    for &l in &w.letters {
        p = p.compose(&AffinePermutation::simple_reflection(w.n, l)?)?;
    }
    Ok(p)
}

/// Reduced word by peeling the smallest right-descent letter; the final
/// length-zero remainder supplies the sigma power.
pub fn greedy_reduced_word(p: &AffinePermutation) -> ReducedWord {
    let mut cur = p.clone();
    let mut rev = Vec::new();
    loop {
        let mut descent = None;
        for i in 0..cur.n() {
            if cur.is_right_descent(i) {
                descent = Some(i);
                break;
            }
        }
        match descent {
            Some(i) => {
                rev.push(i);
                let s = AffinePermutation::simple_reflection(cur.n(), i).unwrap();
                cur = cur.compose(&s).unwrap();
            }
            None => break,
        }
    }
    debug_assert_eq!(cur.length(), 0);
    let sigma_power = cur.window()[0] - 1;
    rev.reverse();
    ReducedWord { n: p.n(), sigma_power, letters: rev }
}

/// Bruhat comparison. Elements of different components are incomparable;
/// within a component the tail-escape counts decide.
pub fn bruhat_leq(p: &AffinePermutation, q: &AffinePermutation) -> Result<bool> {
    if p.n() != q.n() {
        return Err(Error::RankMismatch(format!("n = {} vs {}", p.n(), q.n())));
    }
    if p.component_index() != q.component_index() {
        return Ok(false);
    }
    let lo = p.window().iter().chain(q.window()).min().unwrap() - p.n() as i64;
    let hi = p.window().iter().chain(q.window()).max().unwrap() + p.n() as i64;
    for i in 1..=p.n() as i64 {
        for j in lo..=hi {
            if p.count_escape(i, j) > q.count_escape(i, j) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Bruhat comparison on double cosets of a composition's parabolic subgroup:
/// only counts at the block boundary positions are compared.
pub fn parabolic_bruhat_leq(
    p: &AffinePermutation,
    q: &AffinePermutation,
    composition: &[usize],
) -> Result<bool> {
    if p.n() != q.n() {
        return Err(Error::RankMismatch(format!("n = {} vs {}", p.n(), q.n())));
    }
    let total: usize = composition.iter().sum();
    if total != p.n() || composition.contains(&0) {
        return Err(Error::CompositionInvalid(format!(
            "composition {composition:?} does not fit n = {}",
            p.n()
        )));
    }
    if p.component_index() != q.component_index() {
        return Ok(false);
    }
    let lo = p.window().iter().chain(q.window()).min().unwrap() - p.n() as i64;
    let hi = p.window().iter().chain(q.window()).max().unwrap() + p.n() as i64;
    let mut offset = 0usize;
    for &d in composition {
        let i = offset as i64 + 1; // counts over positions >= o_j + 1
        for j in lo..=hi {
            if p.count_escape(i, j) > q.count_escape(i, j) {
                return Ok(false);
            }
        }
        offset += d;
    }
    Ok(true)
}

const INTERVAL_LENGTH_GUARD: u64 = 12;

/// All elements below p in Bruhat order, via deduplicated subwords of one
/// reduced word. Sorted by (length, window).
pub fn bruhat_interval(p: &AffinePermutation) -> Result<Vec<AffinePermutation>> {
    let len = p.length();
    if len > INTERVAL_LENGTH_GUARD {
        return Err(Error::LengthGuardExceeded(format!(
            "length {len} exceeds interval guard {INTERVAL_LENGTH_GUARD}"
        )));
    }
    let word = greedy_reduced_word(p);
    let k = word.letters.len();
    let mut seen = HashSet::new();
    let base = AffinePermutation::sigma_pow(p.n(), word.sigma_power);
    for mask in 0u64..(1 << k) {
        let mut cur = base.clone();
        for (idx, &l) in word.letters.iter().enumerate() {
            if mask >> idx & 1 == 1 {
                cur = cur.compose(&AffinePermutation::simple_reflection(p.n(), l)?)?;
            }
        }
        seen.insert(cur);
    }
    let mut out: Vec<AffinePermutation> = seen.into_iter().collect();
    out.sort_by(|a, b| a.length().cmp(&b.length()).then(a.cmp_window(b)));
    Ok(out)
}

/// Generators s_i of the finite parabolic subgroup preserving a composition's
/// blocks: all i in [1, n-1] that are not block boundaries.
pub fn parabolic_generators(composition: &[usize]) -> Vec<usize> {
    let n: usize = composition.iter().sum();
    let mut boundaries = HashSet::new();
    let mut o = 0usize;
    for &d in &composition[..composition.len().saturating_sub(1)] {
        o += d;
        boundaries.insert(o);
    }
    (1..n).filter(|i| !boundaries.contains(i)).collect()
}

/// Minimal length representative of p * W_composition: window entries sorted
/// ascending within each block of positions.
pub fn min_coset_rep_right(p: &AffinePermutation, composition: &[usize]) -> AffinePermutation {
    let mut w = p.window().to_vec();
    let mut o = 0usize;
    for &d in composition {
        w[o..o + d].sort_unstable();
        o += d;
    }
    AffinePermutation::new(w).unwrap()
}

/// Minimal length representative of the double coset W_c p W_c, by peeling
/// parabolic descents on both sides.
pub fn min_double_coset_rep(p: &AffinePermutation, composition: &[usize]) -> AffinePermutation {
    let gens = parabolic_generators(composition);
    let mut cur = min_coset_rep_right(p, composition);
    loop {
        let mut moved = false;
        for &g in &gens {
            let s = AffinePermutation::simple_reflection(cur.n(), g).unwrap();
            let left = s.compose(&cur).unwrap();
            if left.length() < cur.length() {
                cur = min_coset_rep_right(&left, composition);
                moved = true;
            }
        }
        if !moved {
            return cur;
        }
    }
}
