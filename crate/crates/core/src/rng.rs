//! Seeding scheme.
//!
//! Every randomized entry point takes an explicit `&mut R: Rng`. Batches
//! derive one independent stream per task from a single 64-bit master seed:
//! task `i` uses ChaCha8 keyed by `seed_from_u64(master)` with stream id
//! `i`. Results therefore do not depend on how tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// The RNG for task `task` under master seed `master`.
pub fn stream(master: u64, task: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(task);
    rng
}

/// Runs `f(task_index, rng)` for `count` tasks in parallel, each on its own
/// stream, and returns the results in task order.
pub fn fan_out<T, F>(master: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut StreamRng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(master, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// Derives a child master seed so that distinct phases of one experiment
/// never share streams.
pub fn subseed(master: u64, phase: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ phase.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
