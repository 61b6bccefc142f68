//! Per-path random streams.
//!
//! Path `i` of a run with seed `s` always draws from ChaCha8 seeded by `s`
//! on stream `i`, whichever worker thread evaluates it. Results are
//! collected in path order and reduced sequentially, so output does not
//! depend on how rayon partitions the work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type PathRng = ChaCha8Rng;

pub fn path_rng(seed: u64, index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `f(scratch, index)` for `index` in `start..start + n`, in
/// parallel, returning results in index order. `init` builds per-worker
/// scratch space.
pub(crate) fn map_paths<T, S, I, F>(start: u64, n: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    (start..start + n as u64).into_par_iter().map_init(init, f).collect()
}
