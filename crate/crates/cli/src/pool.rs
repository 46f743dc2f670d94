//! Bounded worker pool for batch items and Monte Carlo trials.
//!
//! Jobs are pulled from a shared atomic counter and results land in the
//! slot matching their index, so the returned vector is in submission
//! order no matter how the scheduler interleaves workers. Determinism
//! then only requires that each job derives its randomness from its own
//! index, which every caller in this crate does.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Run `n_jobs` independent jobs on up to `threads` workers (0 = all
/// available cores) and collect results in index order.
///
/// Panics in a job propagate after all workers stop picking up new work.
pub fn run_indexed<T, F>(n_jobs: usize, threads: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if n_jobs == 0 {
        return Vec::new();
    }
    let workers = effective_threads(threads).min(n_jobs);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n_jobs).map(|_| None).collect());
    let next = AtomicUsize::new(0);

    if workers <= 1 {
        let mut slots = slots.into_inner().expect("no other lock holders");
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(job(i));
        }
        return slots.into_iter().map(|s| s.expect("job ran")).collect();
    }

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n_jobs {
                    return;
                }
                let result = job(i);
                slots.lock().expect("result lock")[i] = Some(result);
            });
        }
    });

    slots
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|s| s.expect("every index visited"))
        .collect()
}

fn effective_threads(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}
