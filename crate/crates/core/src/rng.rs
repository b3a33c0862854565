//! Seed derivation and independent random streams.
//!
//! Every consumer of randomness in a run draws from its own ChaCha stream so that, for
//! example, the noise of a stochastic objective never interleaves with the optimizer's
//! draws, and the initial population depends only on the run seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Purpose tags for the independent streams derived from one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Initial positions and velocities of the swarm.
    Init = 0,
    /// Per-iteration coefficients of the velocity equations and regrouping.
    Step = 1,
    /// External archive, target generation and relocation.
    Dispersion = 2,
    /// Additive/multiplicative noise of stochastic objectives.
    Noise = 3,
    /// Rotation matrices of rotated objectives.
    Rotation = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index` within an experiment seeded with `master_seed`.
pub fn run_seed(master_seed: u64, run_index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ splitmix64(run_index.wrapping_add(0x5151)))
}

/// The stream `stream` of the generator family rooted at `seed`.
pub fn stream(seed: u64, stream: Stream) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
