//! Seeded randomness. Every job gets its own ChaCha stream derived from the
//! experiment seed, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measure::GridFunction;
use crate::operators::OperatorSpec;

/// Generator for job `stream` under `seed`.
pub fn job_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A smooth random field `Σ a_k exp(−|x − c_k|²/w_k²)`, defined on the
/// continuum so the same field can be sampled on several grids.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpField {
    pub bumps: Vec<(Vec<f64>, f64, f64)>,
}

impl BumpField {
    /// `count` bumps with centres in the middle 80% of `bounds`, widths
    /// between 5% and 25% of the shortest side and amplitudes in `[lo, hi]`.
    pub fn random(rng: &mut impl Rng, bounds: &[[f64; 2]], count: usize, amplitude: [f64; 2]) -> Self {
        let side = bounds.iter().map(|b| b[1] - b[0]).fold(f64::INFINITY, f64::min);
        let bumps = (0..count)
            .map(|_| {
                let c: Vec<f64> = bounds
                    .iter()
                    .map(|b| {
                        let len = b[1] - b[0];
                        b[0] + len * rng.random_range(0.1..0.9)
                    })
                    .collect();
                let w = side * rng.random_range(0.05..0.25);
                let a = rng.random_range(amplitude[0]..=amplitude[1]);
                (c, w, a)
            })
            .collect();
        BumpField { bumps }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.bumps
            .iter()
            .map(|(c, w, a)| {
                let r2: f64 = x.iter().zip(c).map(|(x, c)| (x - c) * (x - c)).sum();
                a * (-r2 / (w * w)).exp()
            })
            .sum()
    }

    pub fn sample(&self, spec: &OperatorSpec) -> GridFunction {
        spec.sample(|x| self.eval(x))
    }
}

/// Signed random field on the operator's domain.
pub fn random_field(spec: &OperatorSpec, rng: &mut impl Rng, count: usize) -> GridFunction {
    BumpField::random(rng, spec.grid().all_bounds(), count, [-1.0, 1.0]).sample(spec)
}

/// Non-negative random field on the operator's domain.
pub fn random_nonnegative_field(spec: &OperatorSpec, rng: &mut impl Rng, count: usize) -> GridFunction {
    BumpField::random(rng, spec.grid().all_bounds(), count, [0.0, 1.0]).sample(spec)
}
