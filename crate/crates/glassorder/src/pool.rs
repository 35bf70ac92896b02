//! Rayon-backed executor.

use glassorder_core::Executor;
use rayon::prelude::*;

/// Runs work items on the current rayon pool. Results come back in index
/// order, so reductions downstream see the same sequence as [`Sequential`].
///
/// [`Sequential`]: glassorder_core::Sequential
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }
}

/// Runs `f` inside a pool with `threads` workers (0 = rayon's default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(f))
}
