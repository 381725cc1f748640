//! Shared helpers for the integration-test suites.
#![allow(dead_code)]

use mobius_vortex::geometry::{Vortex, VortexSystem, TWO_PI};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random canonical system with every lifted pair at least `min_sep` apart;
/// strengths are drawn from ±[0.5, 2).
pub fn random_system(rng: &mut ChaCha8Rng, n: usize, min_sep: f64, y_span: f64) -> VortexSystem {
    loop {
        let vortices = (0..n)
            .map(|_| {
                let x = rng.gen_range(0.0..TWO_PI);
                let y = rng.gen_range(-y_span..y_span);
                let mag = rng.gen_range(0.5..2.0);
                let gamma = if rng.gen_bool(0.5) { mag } else { -mag };
                Vortex::new(x, y, gamma, "")
            })
            .collect();
        let s = VortexSystem::new(vortices);
        match s.min_lift_separation() {
            Some((d, ..)) if d < min_sep => continue,
            _ => return s.canonicalized(),
        }
    }
}

/// Largest absolute difference between two equally long slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
