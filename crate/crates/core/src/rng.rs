//! Seed splitting.
//!
//! Every subsystem draws from its own ChaCha8 stream keyed by the episode
//! seed, so adding draws in one subsystem never perturbs another.
//! Stream ids: 0 placement, 1 neutral drivers, `16 + tank id` per-tank policy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::TankId;

pub type SimRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Placement,
    NeutralDriver,
    Policy(TankId),
}

impl Stream {
    pub fn id(self) -> u64 {
        match self {
            Stream::Placement => 0,
            Stream::NeutralDriver => 1,
            Stream::Policy(tank) => 16 + tank.0 as u64,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
