//! Intra-round parallelism.
//!
//! Every per-node computation is a pure function of the node index, and the
//! results are collected in node order, so serial and pooled execution give
//! identical bits.

use std::sync::Arc;

use rayon::prelude::*;

/// Environment variable that caps intra-round worker threads (0 = serial).
pub const THREADS_ENV: &str = "DOMD_THREADS";

#[derive(Clone, Default)]
pub enum Executor {
    #[default]
    Serial,
    Pool(Arc<rayon::ThreadPool>),
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Executor::Serial => write!(f, "Serial"),
            Executor::Pool(p) => write!(f, "Pool({})", p.current_num_threads()),
        }
    }
}

impl Executor {
    pub fn with_threads(threads: usize) -> Self {
        if threads == 0 {
            return Executor::Serial;
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => Executor::Pool(Arc::new(pool)),
            Err(_) => Executor::Serial,
        }
    }

    /// Reads [`THREADS_ENV`]; unset or unparsable means serial.
    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(0);
        Self::with_threads(threads)
    }

    pub fn threads(&self) -> usize {
        match self {
            Executor::Serial => 0,
            Executor::Pool(p) => p.current_num_threads(),
        }
    }

    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Executor::Serial => (0..n).map(f).collect(),
            Executor::Pool(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }

    pub fn try_map<T, E, F>(&self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        match self {
            Executor::Serial => (0..n).map(f).collect(),
            Executor::Pool(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }
}
