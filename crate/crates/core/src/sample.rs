//! Deterministic sample generators for sweep tests. A small splitmix step
//! keeps the sequences reproducible without pulling a generator dependency
//! into the library itself.

use crate::affine_weyl::{AffinePermutation, TranslationVector};
use crate::field::{Field, Mat};

pub struct Rng64(u64);

impl Rng64 {
    pub fn new(seed: u64) -> Rng64 {
        Rng64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        self.next_u64() % n
    }
}

/// Uniform-ish permutation of 1..=n via Fisher-Yates.
pub fn random_permutation(rng: &mut Rng64, n: usize) -> Vec<i64> {
    let mut perm: Vec<i64> = (1..=n as i64).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        perm.swap(i, j);
    }
    perm
}

/// Random group element: random finite part composed with a random
/// translation with entries in [-spread, spread].
pub fn random_affine(rng: &mut Rng64, n: usize, spread: i64) -> AffinePermutation {
    let bar = AffinePermutation::new(random_permutation(rng, n)).unwrap();
    let c: Vec<i64> = (0..n)
        .map(|_| rng.below(2 * spread as u64 + 1) as i64 - spread)
        .collect();
    bar.compose(&AffinePermutation::translation(&TranslationVector::new(c)))
        .unwrap()
}

/// Random matrix with entries drawn from the field (rationals draw small
/// integers).
pub fn random_matrix(rng: &mut Rng64, field: Field, nr: usize, nc: usize) -> Mat {
    let mut m = Mat::zeros(field, nr, nc);
    for r in 0..nr {
        for c in 0..nc {
            let v = match field {
                Field::Prime(q) => rng.below(q) as i64,
                Field::Rationals => rng.below(7) as i64 - 3,
            };
            m.set(r, c, field.scalar(v));
        }
    }
    m
}

pub fn random_invertible(rng: &mut Rng64, field: Field, n: usize) -> Mat {
    loop {
        let m = random_matrix(rng, field, n, n);
        if m.rank() == n {
            return m;
        }
    }
}

/// Random partition of n, weakly decreasing parts.
pub fn random_partition(rng: &mut Rng64, n: usize) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = n;
    while left > 0 {
        let p = rng.below(left as u64) as usize + 1;
        parts.push(p);
        left -= p;
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut a = Rng64::new(7);
        let mut b = Rng64::new(7);
        for _ in 0..10 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn permutations_are_permutations() {
        let mut rng = Rng64::new(42);
        for n in 1..8 {
            let mut p = random_permutation(&mut rng, n);
            p.sort_unstable();
            assert_eq!(p, (1..=n as i64).collect::<Vec<_>>());
        }
    }

    #[test]
    fn partitions_sum() {
        let mut rng = Rng64::new(1);
        for n in 1..9 {
            let p = random_partition(&mut rng, n);
            assert_eq!(p.iter().sum::<usize>(), n);
            assert!(p.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn invertible_really_is() {
        let mut rng = Rng64::new(3);
        for &q in &[2u64, 3] {
            let f = Field::Prime(q);
            let g = random_invertible(&mut rng, f, 4);
            assert!(g.inverse().is_some());
        }
    }
}
