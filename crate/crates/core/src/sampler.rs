//! Seeded input generation for both tasks and exhaustive enumeration of
//! task A inputs.

use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::task::{InputTupleA, InputTupleB};

const TWO_PI: f64 = 2.0 * PI;

pub const DEFAULT_REJECTION_CAP: u32 = 10_000;

/// Largest party count accepted by [`enumerate_a`].
pub const MAX_ENUMERATE_PARTIES: usize = 10;

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose output is specified bit-for-bit and therefore
/// identical across platforms. Distinct stream ids select disjoint ChaCha
/// streams under the same key.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and a different id.
    pub fn fork(&self, stream_id: u64) -> Self {
        RandomStream::new(self.seed, stream_id)
    }

    /// Uniform angle in `[0, 2pi)`.
    pub fn angle(&mut self) -> f64 {
        loop {
            // u * 2pi can round up to 2pi for u close to 1.
            let v = self.rng.random::<f64>() * TWO_PI;
            if v < TWO_PI {
                return v;
            }
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn check_parties(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::NoParties)
    } else {
        Ok(())
    }
}

/// Uniform draw over the even-sum tuples: `N - 1` free digits, then a last
/// digit chosen uniformly among the two values that make the sum even.
pub fn sample_a(n: usize, rng: &mut RandomStream) -> Result<InputTupleA> {
    check_parties(n)?;
    let mut digits = Vec::with_capacity(n);
    let mut parity = 0u8;
    for _ in 1..n {
        let d = rng.random_range(0..4u8);
        parity ^= d & 1;
        digits.push(d);
    }
    let high = if rng.random::<bool>() { 2 } else { 0 };
    digits.push(high | parity);
    InputTupleA::new(digits)
}

/// Draw from `p_B` by rejection: propose uniformly on `[0, 2pi)^N` and accept
/// with probability `|cos(sum)|`.
pub fn sample_b(n: usize, rng: &mut RandomStream) -> Result<InputTupleB> {
    sample_b_counted(n, rng, DEFAULT_REJECTION_CAP).map(|(x, _)| x)
}

/// Like [`sample_b`] but with an explicit proposal cap, also returning the
/// number of proposals consumed.
pub fn sample_b_counted(
    n: usize,
    rng: &mut RandomStream,
    max_proposals: u32,
) -> Result<(InputTupleB, u32)> {
    check_parties(n)?;
    let mut angles = vec![0.0; n];
    for attempt in 1..=max_proposals {
        for a in angles.iter_mut() {
            *a = rng.angle();
        }
        let sum: f64 = angles.iter().sum();
        if rng.random::<f64>() < sum.cos().abs() {
            return Ok((InputTupleB::new(angles)?, attempt));
        }
    }
    Err(Error::RejectionCapExceeded {
        attempts: max_proposals,
    })
}

/// All even-sum task A tuples in lexicographic order, each with weight
/// `2 / 4^N`.
pub fn enumerate_a(n: usize) -> Result<Vec<(InputTupleA, f64)>> {
    if n == 0 || n > MAX_ENUMERATE_PARTIES {
        return Err(Error::PartiesOutOfRange {
            n,
            min: 1,
            max: MAX_ENUMERATE_PARTIES,
        });
    }
    let total = 1usize << (2 * n);
    let weight = 2.0 / total as f64;
    let mut out = Vec::with_capacity(total / 2);
    for code in 0..total {
        // most significant digit first, for lexicographic order
        let digits: Vec<u8> = (0..n)
            .map(|k| ((code >> (2 * (n - 1 - k))) & 3) as u8)
            .collect();
        if let Ok(x) = InputTupleA::new(digits) {
            out.push((x, weight));
        }
    }
    Ok(out)
}

/// Index of an even-sum tuple among the `4^N` digit strings, most
/// significant digit first.
pub fn tuple_index(x: &InputTupleA) -> usize {
    x.digits()
        .iter()
        .fold(0usize, |acc, &d| (acc << 2) | usize::from(d))
}
