//! Deterministic batch parallelism.
//!
//! Heavy kernels split a batch into a fixed number of chunks that depends on
//! the batch size only, never on the thread count. Chunks write disjoint
//! output ranges and per-chunk partial buffers are reduced in chunk order, so
//! results are bit-identical whether the chunks run on one thread or many.
//! `PAIRRANK_THREADS` caps how many worker threads execute the chunks.

use std::sync::atomic::{AtomicUsize, Ordering};

static THREAD_CAP: AtomicUsize = AtomicUsize::new(0);

/// Maximum worker threads for kernel execution. Resolution order: explicit
/// [`set_thread_cap`], then `PAIRRANK_THREADS`, then available parallelism.
pub fn thread_cap() -> usize {
    let cap = THREAD_CAP.load(Ordering::Relaxed);
    if cap != 0 {
        return cap;
    }
    let resolved = std::env::var("PAIRRANK_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    THREAD_CAP.store(resolved, Ordering::Relaxed);
    resolved
}

pub fn set_thread_cap(n: usize) {
    THREAD_CAP.store(n.max(1), Ordering::Relaxed);
}

/// Number of chunks a batch of `n` items is split into.
pub fn chunk_count(n: usize) -> usize {
    n.clamp(1, 8)
}

/// Splits `0..n` into [`chunk_count`] contiguous ranges.
pub fn chunk_ranges(n: usize) -> Vec<std::ops::Range<usize>> {
    let chunks = chunk_count(n);
    let base = n / chunks;
    let extra = n % chunks;
    let mut out = Vec::with_capacity(chunks);
    let mut start = 0;
    for i in 0..chunks {
        let len = base + usize::from(i < extra);
        out.push(start..start + len);
        start += len;
    }
    debug_assert_eq!(start, n);
    out
}

/// Runs one unit of prepared work per chunk. Work items own any mutable
/// slices they need, so chunks cannot alias. With a thread cap of 1 (or a
/// single item) everything runs inline in chunk order; otherwise chunks are
/// assigned round-robin to at most `thread_cap()` scoped workers.
pub fn run_partitioned<A, F>(work: Vec<A>, f: F)
where
    A: Send,
    F: Fn(usize, A) + Sync,
{
    let n = work.len();
    let threads = thread_cap().min(n);
    if threads <= 1 {
        for (i, item) in work.into_iter().enumerate() {
            f(i, item);
        }
        return;
    }
    let mut lanes: Vec<Vec<(usize, A)>> = (0..threads).map(|_| Vec::new()).collect();
    for (i, item) in work.into_iter().enumerate() {
        lanes[i % threads].push((i, item));
    }
    let f = &f;
    std::thread::scope(|scope| {
        for lane in lanes {
            scope.spawn(move || {
                for (i, item) in lane {
                    f(i, item);
                }
            });
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_everything_once() {
        for n in [1usize, 2, 7, 8, 9, 64, 127] {
            let ranges = chunk_ranges(n);
            assert_eq!(ranges.len(), chunk_count(n));
            let mut covered = 0;
            for r in &ranges {
                assert_eq!(r.start, covered);
                covered = r.end;
            }
            assert_eq!(covered, n);
        }
    }

    #[test]
    fn partitioned_results_do_not_depend_on_thread_cap() {
        let compute = |cap: usize| {
            set_thread_cap(cap);
            let mut out = vec![0.0f64; 40];
            let work: Vec<(usize, &mut [f64])> =
                out.chunks_mut(5).enumerate().collect();
            run_partitioned(work, |_, (i, slice)| {
                for (j, v) in slice.iter_mut().enumerate() {
                    *v = (i * 31 + j) as f64 * 0.25;
                }
            });
            set_thread_cap(1);
            out
        };
        let serial = compute(1);
        let threaded = compute(4);
        assert_eq!(serial, threaded);
    }
}
