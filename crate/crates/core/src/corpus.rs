//! Seeded random corpora for the exact identity checks.
//!
//! All randomness comes from a 64-bit linear congruential generator
//! `x ← a·x + c (mod 2^64)` so that corpora are reproducible from the seed alone.

use crate::exactpoly::{Poly, Rational};
use crate::phasealg::PhasePoly;
use crate::schouten::{multisets, GradedTensor, NPart, SPair, SymTensor};

pub const LCG_MULTIPLIER: u64 = 6364136223846793005;
pub const LCG_INCREMENT: u64 = 1442695040888963407;

#[derive(Clone, Debug)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        let mut rng = Lcg64 { state: seed };
        rng.next_u64();
        rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(LCG_MULTIPLIER)
            .wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform integer in `0..n` from the high bits.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        (self.next_u64() >> 32) % n
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    /// Uniform float in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn chance(&mut self, numer: u64, denom: u64) -> bool {
        self.below(denom) < numer
    }
}

/// Shape limits for random exact objects.
#[derive(Clone, Copy, Debug)]
pub struct CorpusShape {
    pub dim: usize,
    pub max_order: usize,
    pub max_degree: u32,
    pub max_terms: usize,
}

impl CorpusShape {
    pub fn new(dim: usize, max_order: usize, max_degree: u32) -> Self {
        CorpusShape {
            dim,
            max_order,
            max_degree,
            max_terms: 3,
        }
    }
}

pub fn random_rational(rng: &mut Lcg64) -> Rational {
    let mut n = rng.range(-3, 3);
    if n == 0 {
        n = 1;
    }
    Rational::new(n.into(), rng.range(1, 3).into())
}

pub fn random_poly(rng: &mut Lcg64, dim: usize, max_degree: u32, max_terms: usize) -> Poly {
    let nterms = rng.range(1, max_terms as i64) as usize;
    let terms = (0..nterms).map(|_| {
        let mut budget = rng.range(0, max_degree as i64) as u32;
        let mut exps = vec![0u32; dim];
        for e in exps.iter_mut() {
            let take = rng.range(0, budget as i64) as u32;
            *e = take;
            budget -= take;
        }
        // hand the leftover degree to a random axis so high degrees occur
        let axis = rng.below(dim as u64) as usize;
        exps[axis] += budget;
        (exps, random_rational(rng))
    });
    Poly::from_terms(dim, terms.collect::<Vec<_>>())
}

pub fn random_sym(rng: &mut Lcg64, shape: &CorpusShape, order: usize) -> SymTensor {
    let comps: Vec<_> = multisets(shape.dim, order)
        .into_iter()
        .filter_map(|idx| {
            rng.chance(2, 3).then(|| {
                (
                    idx,
                    random_poly(rng, shape.dim, shape.max_degree, shape.max_terms),
                )
            })
        })
        .collect();
    SymTensor::from_components(shape.dim, order, comps)
}

/// Graded tensor with a random subset of the orders `lo..=shape.max_order`.
pub fn random_graded(rng: &mut Lcg64, shape: &CorpusShape, lo: usize) -> GradedTensor {
    let mut parts = Vec::new();
    for k in lo..=shape.max_order {
        if rng.chance(1, 2) {
            parts.push(random_sym(rng, shape, k));
        }
    }
    GradedTensor::from_parts(shape.dim, parts).expect("same dim")
}

pub fn random_spair(rng: &mut Lcg64, shape: &CorpusShape) -> SPair {
    SPair::new(random_sym(rng, shape, 0), random_sym(rng, shape, 1)).expect("orders 0, 1")
}

pub fn random_npart(rng: &mut Lcg64, shape: &CorpusShape) -> NPart {
    NPart::new(random_graded(rng, shape, 2)).expect("orders >= 2")
}

/// Random fiberwise polynomial of p-degree in `lo..=hi`.
pub fn random_phase_poly(rng: &mut Lcg64, shape: &CorpusShape, lo: usize, hi: usize) -> PhasePoly {
    let mut terms = Vec::new();
    for k in lo..=hi {
        for idx in multisets(shape.dim, k) {
            if rng.chance(1, 2) {
                terms.push((
                    idx,
                    random_poly(rng, shape.dim, shape.max_degree, shape.max_terms),
                ));
            }
        }
    }
    PhasePoly::from_terms(shape.dim, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcg_is_reproducible() {
        let mut a = Lcg64::new(7);
        let mut b = Lcg64::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Lcg64::new(8);
        assert_ne!(Lcg64::new(7).next_u64(), c.next_u64());
    }

    #[test]
    fn lcg_first_value() {
        // state after seeding with 0 is the increment; the first draw applies the map again
        let mut r = Lcg64::new(0);
        let expect = LCG_INCREMENT
            .wrapping_mul(LCG_MULTIPLIER)
            .wrapping_add(LCG_INCREMENT);
        assert_eq!(r.next_u64(), expect);
    }

    #[test]
    fn shapes_respect_limits() {
        let mut rng = Lcg64::new(3);
        let shape = CorpusShape::new(2, 4, 3);
        for _ in 0..50 {
            let g = random_graded(&mut rng, &shape, 0);
            assert!(g.max_order().unwrap_or(0) <= 4);
            for p in g.parts() {
                for (_, c) in p.components() {
                    assert!(c.degree() <= 3);
                }
            }
            let x = rng.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }
}
