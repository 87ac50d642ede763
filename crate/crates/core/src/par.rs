//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature enabled, [`ExecMode::Parallel`] dispatches to
//! rayon; without it every mode runs sequentially. Results are always
//! returned in input order, so callers that concatenate per-item outputs get
//! the same sequence regardless of the mode.

/// How cell loops and independent sub-runs are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// Picks a mode from a thread count: one thread means sequential.
    pub fn from_threads(threads: usize) -> Self {
        if threads <= 1 {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Maps `f` over `0..n` in chunks of `chunk` and returns the per-chunk
/// results in chunk order.
pub fn map_chunks<T, F>(mode: ExecMode, n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let ranges: Vec<_> = (0..n.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(n))
        .collect();
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return ranges.into_par_iter().map(f).collect();
    }
    let _ = mode;
    ranges.into_iter().map(f).collect()
}

/// Maps `f` over a slice, preserving order.
pub fn map_items<I, T, F>(mode: ExecMode, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Sizes the global worker pool. `0` keeps the default of one worker per
/// core. Returns false if the pool was already running.
pub fn init_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_preserve_order() {
        for mode in [ExecMode::Sequential, ExecMode::Parallel] {
            let out = map_chunks(mode, 103, 10, |r| r.collect::<Vec<_>>());
            let flat: Vec<usize> = out.into_iter().flatten().collect();
            assert_eq!(flat, (0..103).collect::<Vec<_>>());
        }
    }

    #[test]
    fn zero_length_is_empty() {
        let out = map_chunks(ExecMode::Parallel, 0, 8, |r| r.len());
        assert!(out.is_empty());
    }
}
