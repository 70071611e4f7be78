use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::group::{FiniteGroup, Signal};

/// A signal and a (possibly noisy) translate of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitPair {
    pub x: Signal,
    pub y: Signal,
    /// Kept for evaluation; the objective never reads it.
    pub hidden_g: usize,
}

fn gaussian(rng: &mut impl Rng, std: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std, im * std)
}

/// `size` pairs `(x, g·x + ε)` with standard complex Gaussian `x`, uniform `g`,
/// and per-real-coordinate noise standard deviation `noise_sigma`.
pub fn gen_dataset(group: &FiniteGroup, size: usize, noise_sigma: f64, seed: u64) -> Vec<OrbitPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = group.order();
    (0..size)
        .map(|_| {
            let x = Signal::new((0..n).map(|_| gaussian(&mut rng, 1.0)).collect());
            let g = rng.random_range(0..n);
            let moved = group.act(g, &x).expect("signal matches group order");
            let y = if noise_sigma > 0.0 {
                Signal::new(moved.values().iter().map(|v| v + gaussian(&mut rng, noise_sigma)).collect())
            } else {
                moved
            };
            OrbitPair { x, y, hidden_g: g }
        })
        .collect()
}
