//! Quasi-random interior points: a Halton sequence with a seeded
//! Cranley-Patterson rotation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::MetricModel;

pub const DEFAULT_SEED: u64 = 1729;
pub const SEED_ENV: &str = "VSTATIC_SEED";

const PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

/// Seed from `VSTATIC_SEED`, else the default. An unparsable value is an error.
pub fn seed_from_env() -> Result<u64, String> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse::<u64>().map_err(|_| format!("{SEED_ENV} must be a non-negative integer (got '{s}')")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    out
}

/// FNV-1a, used to give every model its own stream.
fn stream_of(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// `count` points at least `margin` inside the chart box of `model`.
pub fn sample_points(model: &MetricModel, count: usize, margin: f64, seed: u64) -> Vec<Vec<f64>> {
    let n = model.n;
    assert!(n <= PRIMES.len(), "Halton bases exhausted");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_of(&model.name));
    let shift: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    (0..count as u64)
        .map(|k| {
            (0..n)
                .map(|d| {
                    let u = (radical_inverse(k + 1, PRIMES[d]) + shift[d]).fract();
                    let (lo, hi) = model.domain[d];
                    let (lo, hi) = (lo + margin, hi - margin);
                    lo + (hi - lo) * u
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sphere_model;

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn points_are_interior_and_reproducible() {
        let m = sphere_model(4, 1.0, 1.0).unwrap();
        let a = sample_points(&m, 64, 0.05, 7);
        assert!(a.iter().all(|p| m.is_interior(p, 0.05)));
        assert_eq!(a, sample_points(&m, 64, 0.05, 7));
        assert_ne!(a, sample_points(&m, 64, 0.05, 8));
    }
}
