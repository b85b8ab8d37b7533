//! Deterministic seeded randomness for initialization and sampling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tensor::Tensor;

/// The one PRNG used everywhere; explicit 64-bit seed, reproducible across runs.
pub type Prng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Prng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Flat vector of uniform(-scale, scale) draws.
pub fn uniform_vec(rng: &mut Prng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Weight initialization: uniform(-0.08, 0.08), the usual recurrent-net choice.
pub const INIT_SCALE: f64 = 0.08;

pub fn uniform_tensor(rng: &mut Prng, shape: &[usize], scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, uniform_vec(rng, n, scale)).expect("consistent shape")
}
