//! Reproducible random number streams.
//!
//! Two generators cover the two simulation styles:
//!
//! * [`RngStream`] hands each replication its own ChaCha8 stream, so
//!   replications can run on any worker in any order and still produce the
//!   same event sequences.
//! * [`CounterNormal`] is a stateless counter-based normal source keyed by
//!   `(seed, replication, step, coordinate)`, used by the SDE integrators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Used for seed derivation and as the mixing core of
/// [`CounterNormal`]; not used as a sequential generator anywhere.
#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed for a named component of a larger experiment.
///
/// Used by studies to give each (arm, parameter point, repeat) an
/// independent seed derived from the master seed.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h = splitmix64(master);
    for &b in tag.as_bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index)
}

/// One replication's slice of the master seed.
///
/// Identical `(master_seed, replication)` pairs yield identical event
/// sequences, independent of which worker thread runs them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub replication: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, replication: u64) -> Self {
        Self {
            master_seed,
            replication,
        }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replication);
        rng
    }
}

/// Exponential waiting time with the given rate, from a uniform draw.
///
/// Uses `1 - u` so the argument of `ln` lies in `(0, 1]`.
#[inline]
pub fn exp_time<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Counter-based standard normal source.
///
/// Every draw is a pure function of `(seed, replication, step, coordinate)`,
/// so SDE paths are reproducible under any parallel scheduling of the
/// replications. Two SplitMix64 chains feed a Box-Muller transform.
#[derive(Debug, Clone, Copy)]
pub struct CounterNormal {
    key: u64,
}

impl CounterNormal {
    pub fn new(seed: u64, replication: u64) -> Self {
        let key = splitmix64(splitmix64(seed) ^ replication.wrapping_mul(0xd134_2543_de82_ef95));
        Self { key }
    }

    #[inline]
    fn word(&self, step: u64, coord: u32, lane: u64) -> u64 {
        let mut h = self.key ^ splitmix64(step);
        h = splitmix64(h ^ (u64::from(coord) << 32) ^ lane);
        h
    }

    /// Standard normal draw for `(step, coord)`.
    #[inline]
    pub fn normal(&self, step: u64, coord: u32) -> f64 {
        // u1 in (0, 1], u2 in [0, 1)
        let w1 = self.word(step, coord, 0x1);
        let w2 = self.word(step, coord, 0x2);
        let u1 = ((w1 >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
        let u2 = (w2 >> 11) as f64 / (1u64 << 53) as f64;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
