//! Index-ordered parallel map on scoped threads.
//!
//! Results are always returned in index order, so any reduction done by the
//! caller sees the same sequence regardless of the worker count.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

/// Worker count: `RPF_THREADS` if set to a positive integer, else the
/// available parallelism.
pub fn worker_count() -> usize {
    let avail = thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1);
    match std::env::var("RPF_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => avail,
    }
}

/// `(0..n).map(f)` on up to `workers` threads; the first error by index wins.
pub fn map_indexed<T, E, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync,
{
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<T, E>>> = (0..n).map(|_| None).collect();
    let chunks: Vec<Vec<(usize, Result<T, E>)>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= n {
                            break;
                        }
                        out.push((i, f(i)));
                    }
                    out
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    for (i, r) in chunks.into_iter().flatten() {
        slots[i] = Some(r);
    }
    slots.into_iter().map(|r| r.expect("every index computed")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_and_independent_of_workers() {
        let one: Vec<u64> = map_indexed(1000, 1, |i| Ok::<_, ()>((i as u64).pow(2))).unwrap();
        for w in [2, 3, 8] {
            let many: Vec<u64> = map_indexed(1000, w, |i| Ok::<_, ()>((i as u64).pow(2))).unwrap();
            assert_eq!(one, many);
        }
        let err = map_indexed(100, 4, |i| if i >= 40 { Err(i) } else { Ok(i) });
        assert_eq!(err, Err(40));
        assert!(map_indexed(0, 4, Ok::<_, ()>).unwrap().is_empty());
    }
}
