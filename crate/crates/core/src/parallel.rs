//! Data-parallel evaluation of independent work items.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs on
//! rayon; without it every mode runs sequentially. Results always come back
//! in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run work concurrently.
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(mode: Execution, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.into_par_iter().map(f).collect(),
        _ => items.into_iter().map(f).collect(),
    }
}

/// Like [`map`] for fallible work; returns the first error in input order.
pub fn try_map<T, U, F>(mode: Execution, items: Vec<T>, f: F) -> Result<Vec<U>>
where
    T: Send,
    U: Send,
    F: Fn(T) -> Result<U> + Send + Sync,
{
    map(mode, items, f).into_iter().collect()
}

/// Runs `op` with at most `jobs` worker threads. `jobs == 1` forces
/// sequential execution.
pub fn with_jobs<R, F>(jobs: usize, op: F) -> Result<R>
where
    R: Send,
    F: FnOnce(Execution) -> R + Send,
{
    if jobs == 0 {
        return invalid("--jobs must be at least 1");
    }
    if jobs == 1 {
        return Ok(op(Execution::Sequential));
    }
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| crate::Error::InvalidParameter(format!("thread pool: {e}")))?;
        Ok(pool.install(|| op(Execution::Parallel)))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(op(Execution::Sequential))
    }
}
