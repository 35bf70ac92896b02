//! Execution strategy for independent work items.
//!
//! Estimators fan out over disorder samples (and sizes, couplings, ...)
//! through an [`Executor`]. Results always come back in index order and every
//! reduction downstream uses [`crate::math::pairwise_sum`], so the numbers do
//! not depend on which executor ran them.

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
