//! Deterministic batched Monte Carlo over rayon.
//!
//! Samples are cut into fixed-size batches; batch `i` always draws from `stream.child(i)`,
//! and results come back in batch order. Thread count changes scheduling only.

use crate::gaussian::RngStream;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const BATCH_SIZE: u64 = 4096;

pub fn batch_counts(total: u64, batch: u64) -> Vec<u64> {
    let full = total / batch;
    let rem = total % batch;
    let mut v = vec![batch; full as usize];
    if rem > 0 {
        v.push(rem);
    }
    v
}

/// Run `f(rng, count, batch_index)` for each batch in parallel; output is in batch order.
pub fn run_batches<A, F>(total: u64, stream: RngStream, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64, usize) -> A + Sync,
{
    batch_counts(total, BATCH_SIZE)
        .into_par_iter()
        .enumerate()
        .map(|(i, count)| {
            let mut rng = stream.child(i as u64).rng();
            f(&mut rng, count, i)
        })
        .collect()
}
