//! Per-trial random streams derived from the master seed.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed and
//! positioned on stream `(trial << 8) | tag`, so a trial's draws do not
//! depend on how many other trials ran or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamTag {
    InitialPreference = 1,
    Policy = 2,
    Noise = 3,
    EstimatorInit = 4,
    Plan = 5,
    Design = 6,
}

pub fn stream(master: u64, trial: u64, tag: StreamTag) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream((trial << 8) | tag as u64);
    rng
}
