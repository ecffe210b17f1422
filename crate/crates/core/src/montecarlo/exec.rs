//! Index-ordered map over work chunks.
//!
//! Results always come back in chunk order, so the caller's reduction is the
//! same whichever backend ran the chunks. Without the `parallel` feature
//! everything runs on the calling thread.

use crate::Result;

/// Execution backend for a chunked map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Sequential,
    /// Rayon pool with the given number of worker threads.
    Parallel(usize),
}

impl Backend {
    /// `Parallel(p)` for `p > 1` when the `parallel` feature is enabled,
    /// otherwise `Sequential`.
    pub fn for_parallelism(parallelism: usize) -> Self {
        if cfg!(feature = "parallel") && parallelism > 1 {
            Backend::Parallel(parallelism)
        } else {
            Backend::Sequential
        }
    }
}

pub fn map_chunks<T, F>(n_chunks: usize, backend: Backend, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match backend {
        Backend::Sequential => Ok((0..n_chunks).map(f).collect()),
        Backend::Parallel(threads) => parallel_map(n_chunks, threads, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n_chunks: usize, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| (0..n_chunks).into_par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n_chunks: usize, _threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    Ok((0..n_chunks).map(f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_chunks(100, Backend::Sequential, |i| i * i).unwrap();
        let par = map_chunks(100, Backend::Parallel(4), |i| i * i).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }

    #[test]
    fn single_thread_is_sequential() {
        assert_eq!(Backend::for_parallelism(1), Backend::Sequential);
    }
}
