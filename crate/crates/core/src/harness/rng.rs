//! Counter-based stream derivation.
//!
//! Every chain of events gets its own ChaCha stream selected by hashing the
//! grid point, the regime and the chain index. Results therefore do not
//! depend on execution order or on how chains are spread across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which forced regime (or auxiliary process) a stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    H0,
    H1,
    Markov,
    Rho,
}

impl Regime {
    fn tag(self) -> u64 {
        match self {
            Regime::H0 => 0x48_30,
            Regime::H1 => 0x48_31,
            Regime::Markov => 0x4d_4b,
            Regime::Rho => 0x52_48,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for one chain of a grid point. `point` is usually the bit pattern
/// of the target false-alarm probability.
pub fn chain_rng(seed: u64, point: u64, regime: Regime, chain: u64) -> ChaCha8Rng {
    let stream = splitmix64(splitmix64(splitmix64(point) ^ regime.tag()) ^ chain);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
