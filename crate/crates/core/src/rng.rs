//! Seeded random streams.
//!
//! Every sampler takes a `u64` seed and builds a ChaCha8 stream from it; ChaCha is a
//! counter-based generator with a fixed, platform-independent output sequence. Parallel
//! tasks use `seed ^ task_index` as their own seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Name recorded next to the seed in output artifacts.
pub const GENERATOR_NAME: &str = "chacha8";

pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn task_seed(seed: u64, task: usize) -> u64 {
    seed ^ task as u64
}

pub fn for_task(seed: u64, task: usize) -> Rng {
    from_seed(task_seed(seed, task))
}

/// A uniform point of the probability simplex (Dirichlet(1,…,1)).
pub fn dirichlet_ones(rng: &mut Rng, dim: usize) -> Vec<f64> {
    use rand::Rng as _;
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            let u: f64 = rng.random();
            -(1.0 - u).ln()
        })
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}
