//! Deterministic fan-out over sample indices. Each index is mapped
//! independently (callers derive per-index generator seeds), so the result
//! is the same for any job count.

/// Maps `0..count` through `f` on up to `jobs` threads, preserving order.
pub fn map_indexed<T, F>(count: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.max(1).min(count.max(1));
    if jobs == 1 {
        return (0..count).map(f).collect();
    }
    let chunk = count.div_ceil(jobs);
    let mut pieces: Vec<Vec<T>> = Vec::with_capacity(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let f = &f;
                let lo = j * chunk;
                let hi = ((j + 1) * chunk).min(count);
                scope.spawn(move || (lo..hi).map(f).collect::<Vec<T>>())
            })
            .collect();
        for h in handles {
            pieces.push(h.join().expect("worker panicked"));
        }
    });
    pieces.into_iter().flatten().collect()
}
