//! Counter-keyed random substreams.
//!
//! Every random draw in the library comes from a [`ChaCha8Rng`] whose key is
//! derived from the master seed and a [`Domain`] tag, and whose 64-bit stream
//! id is derived from up to three indices (for the bootstrap: replicate,
//! model, task). A substream therefore depends only on its coordinates, never
//! on the order in which work is scheduled.
//!
//! The derivation is frozen; changing it changes every seeded output:
//!
//! * key words `k[0..4]` are successive outputs of SplitMix64 started at
//!   `seed ^ domain.tag()`;
//! * `stream = mix(mix(mix(a) ^ b) ^ c)` where `mix` is the SplitMix64
//!   finalizer applied to `x + 0x9E3779B97F4A7C15`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent purposes that draw randomness from the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Bootstrap,
    RankNoise,
    Chain,
    Predictive,
    Jitter,
    /// Free-form domain for callers outside the library.
    Custom(u64),
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Bootstrap => 0x6f6f_7473_7472_6170,
            Domain::RankNoise => 0x6b6e_6172_6573_696f,
            Domain::Chain => 0x6e69_6168_6363_6d63,
            Domain::Predictive => 0x6465_7270_7473_6f70,
            Domain::Jitter => 0x7265_7474_696a_0000,
            Domain::Custom(t) => t.rotate_left(17) ^ 0xa076_1d64_78bd_642f,
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn mix(x: u64) -> u64 {
    finalize(x.wrapping_add(GOLDEN))
}

fn key(seed: u64, domain: Domain) -> [u8; 32] {
    let mut state = seed ^ domain.tag();
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&finalize(state).to_le_bytes());
    }
    out
}

/// Stream id for the coordinate triple `(a, b, c)`.
pub fn stream_id(a: u64, b: u64, c: u64) -> u64 {
    mix(mix(mix(a) ^ b) ^ c)
}

/// Random stream for coordinates `(a, b, c)` under `(seed, domain)`.
pub fn substream(seed: u64, domain: Domain, a: u64, b: u64, c: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, domain));
    rng.set_stream(stream_id(a, b, c));
    rng
}
