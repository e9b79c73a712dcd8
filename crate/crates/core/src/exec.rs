//! Chunked fold over an index range, run on the rayon pool when the
//! `parallel` feature is enabled and sequentially otherwise.
//!
//! Chunks are reduced in index order, so any associative merge gives the same
//! result on both paths.

use std::ops::Range;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

const MIN_CHUNK: u64 = 1 << 12;
const CHUNKS_PER_THREAD: u64 = 8;

fn chunk_ranges(total: u64, exec: Execution) -> Vec<Range<u64>> {
    if total == 0 {
        return Vec::new();
    }
    let threads = if exec.is_parallel() { worker_count() as u64 } else { 1 };
    let chunk = (total / (threads * CHUNKS_PER_THREAD)).max(MIN_CHUNK);
    (0..total.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(total))
        .collect()
}

#[cfg(feature = "parallel")]
fn worker_count() -> usize {
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
fn worker_count() -> usize {
    1
}

/// Folds `work` over contiguous chunks of `0..total` and merges the partial
/// results with `merge`, starting from `identity()`.
pub fn fold_range<T, W, I, M>(total: u64, exec: Execution, identity: I, work: W, merge: M) -> T
where
    T: Send,
    W: Fn(Range<u64>) -> T + Sync + Send,
    I: Fn() -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let ranges = chunk_ranges(total, exec);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && ranges.len() > 1 {
        use rayon::prelude::*;
        return ranges
            .into_par_iter()
            .map(work)
            .reduce(identity, merge);
    }
    ranges.into_iter().map(work).fold(identity(), merge)
}

/// Maps `f` over `items` preserving order, on the pool when enabled.
pub fn map_ordered<T, U, F>(items: Vec<T>, exec: Execution, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = exec;
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        for total in [0u64, 1, 4095, 4096, 100_000] {
            let run = |exec| {
                fold_range(total, exec, || (0u64, 0u64), |r| (r.end - r.start, r.clone().sum()), |a, b| {
                    (a.0 + b.0, a.1 + b.1)
                })
            };
            let seq = run(Execution::Sequential);
            assert_eq!(seq, run(Execution::Parallel));
            assert_eq!(seq.0, total);
            assert_eq!(seq.1, total * total.saturating_sub(1) / 2);
        }
    }

    #[test]
    fn map_keeps_order() {
        let out = map_ordered((0..1000).collect(), Execution::Parallel, |x: u32| x * 2);
        assert_eq!(out, (0..1000).map(|x| x * 2).collect::<Vec<_>>());
    }
}
