//! Static load balancing of the independent table rows over a persistent
//! worker pool.
//!
//! Row `j` of a step costs roughly `n_j` work units in both the explicit and
//! implicit case (one LU costs about as much as a substitution at these
//! sizes). For an arithmetic sequence `n_j = j·m`, pairing row `j` with row
//! `k + 1 - j` gives every pair the same cost `(k + 1)·m`, so the pairs can
//! be handed out statically without any runtime balancing.
//!
//! Row indices in this module are zero-based.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticSchedule {
    /// Rows assigned to each worker, in execution order.
    pub assignment: Vec<Vec<usize>>,
    /// `Σ n_j` over each worker's rows.
    pub work_units: Vec<usize>,
}

impl StaticSchedule {
    pub fn num_workers(&self) -> usize {
        self.assignment.len()
    }

    pub fn rows(&self) -> usize {
        self.assignment.iter().map(Vec::len).sum()
    }

    /// Largest minus smallest per-worker work.
    pub fn spread(&self) -> usize {
        let max = self.work_units.iter().copied().max().unwrap_or(0);
        let min = self.work_units.iter().copied().min().unwrap_or(0);
        max - min
    }
}

fn is_arithmetic(seq: &[usize]) -> bool {
    seq.iter().enumerate().all(|(j, &n)| n == (j + 1) * seq[0])
}

/// Assigns rows `0..k` to at most `num_workers` workers.
///
/// Arithmetic (harmonic-multiple) sequences pair the extremes `(j, k-1-j)`
/// into `⌈k/2⌉` slots which are dealt round-robin onto
/// `min(num_workers, ⌈k/2⌉)` workers. Other sequences deal single rows
/// round-robin onto `min(num_workers, k)` workers.
pub fn build_schedule(seq: &[usize], k: usize, num_workers: usize) -> StaticSchedule {
    assert!(k >= 1 && num_workers >= 1);
    assert!(seq.len() >= k, "sequence shorter than k");
    let seq = &seq[..k];
    let slots: Vec<Vec<usize>> = if is_arithmetic(seq) {
        (0..k.div_ceil(2))
            .map(|j| {
                let partner = k - 1 - j;
                if partner == j {
                    vec![j]
                } else {
                    vec![j, partner]
                }
            })
            .collect()
    } else {
        (0..k).map(|j| vec![j]).collect()
    };
    let workers = num_workers.min(slots.len());
    let mut assignment = vec![Vec::new(); workers];
    for (i, slot) in slots.into_iter().enumerate() {
        assignment[i % workers].extend(slot);
    }
    let work_units = assignment
        .iter()
        .map(|rows| rows.iter().map(|&j| seq[j]).sum())
        .collect();
    StaticSchedule {
        assignment,
        work_units,
    }
}

/// Long-lived workers reused by every step of a solve.
///
/// Backed by a dedicated rayon pool: its threads spin briefly and then park
/// between steps, and [`rayon::ThreadPool::broadcast`] hands each of them
/// its statically assigned rows without creating tasks per row.
pub struct WorkerPool {
    pool: Option<rayon::ThreadPool>,
    threads_started: Arc<AtomicUsize>,
}

impl WorkerPool {
    /// A pool with `num_workers` threads; one worker runs inline on the
    /// calling thread with no pool at all.
    pub fn new(num_workers: usize) -> Self {
        let threads_started = Arc::new(AtomicUsize::new(0));
        let pool = if num_workers > 1 {
            let counter = Arc::clone(&threads_started);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(num_workers)
                .thread_name(|i| format!("parex-worker-{i}"))
                .start_handler(move |_| {
                    counter.fetch_add(1, Ordering::Relaxed);
                })
                .build()
                .expect("failed to start worker threads");
            Some(pool)
        } else {
            None
        };
        Self {
            pool,
            threads_started,
        }
    }

    pub fn serial() -> Self {
        Self::new(1)
    }

    pub fn num_workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Number of OS threads the pool has started over its lifetime.
    pub fn threads_started(&self) -> usize {
        self.threads_started.load(Ordering::Relaxed)
    }

    /// Runs `task(j)` for every row of `schedule` and returns the results
    /// indexed by row.
    ///
    /// Rows never interact, so the output does not depend on the number of
    /// workers. If several rows fail, the error of the lowest row index is
    /// returned.
    pub fn run_rows<T, F>(&self, schedule: &StaticSchedule, task: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync,
    {
        let k = schedule.rows();
        let mut slots: Vec<Option<Result<T>>> = (0..k).map(|_| None).collect();
        match &self.pool {
            Some(pool) if schedule.num_workers() > 1 => {
                let threads = pool.current_num_threads();
                let per_worker = pool.broadcast(|ctx| {
                    let mut out = Vec::new();
                    // fold assignments if the schedule has more workers than threads
                    for rows in schedule.assignment.iter().skip(ctx.index()).step_by(threads) {
                        out.extend(rows.iter().map(|&j| (j, task(j))));
                    }
                    out
                });
                for (j, r) in per_worker.into_iter().flatten() {
                    slots[j] = Some(r);
                }
            }
            _ => {
                for (j, slot) in slots.iter_mut().enumerate() {
                    *slot = Some(task(j));
                }
            }
        }
        slots
            .into_iter()
            .map(|s| s.expect("every row is assigned exactly once"))
            .collect()
    }
}

impl std::fmt::Debug for WorkerPool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkerPool")
            .field("num_workers", &self.num_workers())
            .finish()
    }
}
