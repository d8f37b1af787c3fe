//! Trial-level parallelism and deterministic per-trial random streams.
//!
//! With the `parallel` feature (default) work items are spread over the
//! rayon pool; without it the same closures run in order on the calling
//! thread. Each item draws from its own ChaCha stream derived from the
//! master seed and the item index, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// RNG for work item `index` under `master_seed`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Sub-stream key for nested loops, e.g. (SNR point, trial).
pub fn substream(outer: u64, inner: u64) -> u64 {
    outer.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(inner)
}

/// Map `f` over `0..n`, preserving order.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential reference for [`par_map`], always available for comparison.
pub fn seq_map<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Whether the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
