//! Worker pool backing the reduction engine.

use fpna_core::Executor;
use rayon::prelude::*;

use crate::error::Result;

pub const THREADS_ENV: &str = "FPNA_THREADS";

/// A dedicated rayon pool with a fixed number of workers.
pub struct Pool {
    inner: rayon::ThreadPool,
    workers: usize,
}

impl Pool {
    pub fn new(workers: usize) -> Result<Self> {
        let workers = workers.max(1);
        let inner = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("fpna-worker-{i}"))
            .build()?;
        Ok(Pool { inner, workers })
    }

    /// Pool sized by `requested`, else `FPNA_THREADS`, else the host's
    /// available parallelism.
    pub fn from_env(requested: Option<usize>) -> Result<Self> {
        Self::new(resolve_threads(requested, std::env::var(THREADS_ENV).ok().as_deref()))
    }
}

impl std::fmt::Debug for Pool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pool").field("workers", &self.workers).finish()
    }
}

impl Executor for Pool {
    fn workers(&self) -> usize {
        self.workers
    }

    fn for_each(&self, count: usize, task: &(dyn Fn(usize) + Sync)) {
        if self.workers == 1 {
            (0..count).for_each(task);
            return;
        }
        self.inner.install(|| (0..count).into_par_iter().for_each(task));
    }
}

pub fn resolve_threads(requested: Option<usize>, env: Option<&str>) -> usize {
    requested
        .or_else(|| env.and_then(|v| v.trim().parse().ok()))
        .filter(|&k| k > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpna_core::exec::map_indexed;

    #[test]
    fn flag_beats_env() {
        assert_eq!(resolve_threads(Some(3), Some("5")), 3);
        assert_eq!(resolve_threads(None, Some("5")), 5);
        assert!(resolve_threads(None, Some("junk")) >= 1);
        assert!(resolve_threads(Some(0), None) >= 1);
    }

    #[test]
    fn every_index_runs_once() {
        for k in [1, 2, 8] {
            let pool = Pool::new(k).unwrap();
            let out = map_indexed(&pool, 1000, |i| i as f64);
            assert_eq!(out, (0..1000).map(|i| i as f64).collect::<Vec<_>>());
            assert_eq!(pool.workers(), k);
        }
    }
}
