//! Seeded random suites for the three-circles inequalities.

use conelab_core::cone::{degree_spectrum, sphere_spectrum, ConeHarmonic, ConeSpace};
use conelab_core::three_circles::{
    lemma31, three_circles_i_cone, three_circles_j_cone, WeightSystem,
};
use conelab_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 0x7c1_2024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub cases: usize,
    /// Cases where the premise held, so the implication was actually tested.
    pub premises: usize,
    pub counterexamples: usize,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.counterexamples == 0
    }
}

/// Weights on `1..=8` exponents in `[0, 6)` including `0`, about a fifth of
/// them zero, and an exponent `α` off the listed ones.
pub fn random_weight_system(rng: &mut ChaCha8Rng) -> WeightSystem {
    let n = rng.gen_range(1..=8);
    let mut exponents: Vec<f64> = (1..n).map(|_| rng.gen_range(0.0..6.0)).collect();
    exponents.push(0.0);
    exponents.sort_by(f64::total_cmp);
    let weights = (0..n)
        .map(|_| {
            if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.0..10.0)
            }
        })
        .collect();
    let alpha = loop {
        let a = rng.gen_range(0.01..6.0);
        if exponents.iter().all(|e| (e - a).abs() > 1e-6) {
            break a;
        }
    };
    WeightSystem::new(weights, exponents, alpha).expect("generated system is valid")
}

pub fn lemma31_suite(seed: u64, cases: usize) -> SuiteSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SuiteSummary {
        cases,
        premises: 0,
        counterexamples: 0,
    };
    for _ in 0..cases {
        let out = lemma31(&random_weight_system(&mut rng));
        s.premises += out.hypothesis as usize;
        s.counterexamples += (out.hypothesis && !out.conclusion) as usize;
    }
    s
}

/// Systems supported on `α` alone (even indices) or with one extra
/// off-`α` weight (odd indices). Returns how many cases had
/// `equality == supported_on_alpha == (index even)`.
pub fn lemma31_equality_suite(seed: u64, cases: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = 0;
    for case in 0..cases {
        let n = rng.gen_range(2..=8);
        let alpha = rng.gen_range(0.1..6.0);
        let slot = rng.gen_range(1..n);
        let mut exponents: Vec<f64> = (0..n)
            .map(|i| if i == 0 { 0.0 } else { rng.gen_range(0.0..6.0) })
            .collect();
        exponents[slot] = alpha;
        exponents.sort_by(f64::total_cmp);
        let mut weights: Vec<f64> = exponents
            .iter()
            .map(|&e| {
                if e == alpha {
                    rng.gen_range(0.5..5.0)
                } else {
                    0.0
                }
            })
            .collect();
        let exact = case % 2 == 0;
        if !exact {
            let off = exponents
                .iter()
                .position(|&e| e != alpha)
                .expect("two distinct exponents");
            weights[off] = rng.gen_range(0.5..5.0);
        }
        let out = lemma31(
            &WeightSystem::new(weights, exponents, alpha).expect("generated system is valid"),
        );
        agree +=
            (out.equality == exact && out.supported_on_alpha == exact && out.conclusion) as usize;
    }
    agree
}

/// A random finite harmonic on the cone of power `κ ∈ [2, 10)` over a round
/// `S²` of radius in `[0.3, 1.5)`, with up to 8 terms in distinct eigenspaces
/// `from..8`, an off-spectrum `α` and a radius in `[10⁻³, 10³)`.
#[derive(Debug, Clone)]
pub struct ConeCase {
    pub cone: ConeSpace,
    pub terms: Vec<(f64, usize)>,
    pub alpha: f64,
    pub r: f64,
}

pub fn random_cone_case(rng: &mut ChaCha8Rng, from: usize) -> ConeCase {
    let kappa = rng.gen_range(2.0..10.0);
    let radius = rng.gen_range(0.3..1.5);
    let cone = ConeSpace::new(kappa, sphere_spectrum(2, radius, 8).expect("valid sphere"))
        .expect("valid cone");
    let terms = {
        let count = rng.gen_range(1..=8 - from);
        rand::seq::index::sample(rng, 8 - from, count)
    }
    .into_iter()
    .map(|i| (rng.gen_range(-5.0..5.0), from + i))
    .collect();
    let spec = degree_spectrum(&cone, 8);
    let alpha = loop {
        let a = rng.gen_range(0.05..12.0);
        if !spec.is_in_degree_spectrum(a, 1e-3).member {
            break a;
        }
    };
    let r = 10f64.powf(rng.gen_range(-3.0..3.0));
    ConeCase {
        cone,
        terms,
        alpha,
        r,
    }
}

/// Three-circles implications for `J` (all modes) and `I` (harmonics
/// vanishing at the vertex) on `cases` random cones each.
pub fn cone_suite(seed: u64, cases: usize) -> Result<(SuiteSummary, SuiteSummary)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j = SuiteSummary {
        cases,
        premises: 0,
        counterexamples: 0,
    };
    let mut i = j.clone();
    for _ in 0..cases {
        let c = random_cone_case(&mut rng, 0);
        let tc = three_circles_j_cone(&ConeHarmonic::new(&c.cone, c.terms)?, c.r, c.alpha, 1e-6)?;
        j.premises += tc.premise as usize;
        j.counterexamples += !tc.implication_holds() as usize;

        let c = random_cone_case(&mut rng, 1);
        let tc = three_circles_i_cone(&ConeHarmonic::new(&c.cone, c.terms)?, c.r, c.alpha, 1e-6)?;
        i.premises += tc.premise as usize;
        i.counterexamples += !tc.implication_holds() as usize;
    }
    Ok((j, i))
}
