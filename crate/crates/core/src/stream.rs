//! Reproducible random streams for chunked Monte Carlo.
//!
//! A draw sequence is addressed by `(seed, stream, chunk)`. The seed and
//! stream id are expanded through SplitMix64 into a ChaCha8 key; the chunk
//! index selects ChaCha's 64-bit stream counter. Sample `i` of a run always
//! lands in chunk `i / CHUNK_LEN`, so the values drawn never depend on how
//! rayon schedules the chunks. Partial results are collected in chunk order
//! and reduced sequentially.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Samples per chunk.
pub const CHUNK_LEN: u64 = 1 << 16;

/// Upper bound on a single sampling request.
pub const MAX_SAMPLES: u64 = 100_000_000;

/// Stream ids used by the library. Callers that need several independent
/// streams under one seed offset from these.
pub mod ids {
    pub const ANGLE: u64 = 0;
    pub const PHASOR_TERM_BASE: u64 = 1 << 32;
    pub const HUYGENS_COEFFICIENTS: u64 = 2 << 32;
    pub const METRIC: u64 = 3 << 32;
    pub const REPORT_BASE: u64 = 4 << 32;
}

pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed, e.g. one per report block.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut s = seed ^ tag.rotate_left(17);
    splitmix64(&mut s);
    splitmix64(&mut s)
}

pub fn chunk_rng(seed: u64, stream: u64, chunk: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mixed = splitmix64(&mut state) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut state = mixed;
    let mut key = [0u8; 32];
    for word in key.chunks_exact_mut(8) {
        word.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(chunk);
    rng
}

pub fn check_count(count: u64) -> Result<()> {
    if count > MAX_SAMPLES {
        return Err(Error::CountTooLarge {
            count,
            max: MAX_SAMPLES,
        });
    }
    Ok(())
}

/// Run `work(chunk_index, chunk_len)` over all chunks covering `count`
/// samples, in parallel, returning results in chunk order.
pub fn map_chunks<T, F>(count: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, usize) -> T + Sync + Send,
{
    let chunks = count.div_ceil(CHUNK_LEN);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_LEN;
            let len = (count - start).min(CHUNK_LEN) as usize;
            work(c, len)
        })
        .collect()
}
