//! Data-parallel map over independent work items (simulation sweeps), with a
//! sequential fallback when the `parallel` feature is disabled.

/// Maximum worker threads for sweeps, from the VISCO_THREADS environment
/// variable; `None` leaves the default pool size.
pub fn thread_cap() -> Option<usize> {
    std::env::var("VISCO_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
}

#[cfg(feature = "parallel")]
pub fn pmap<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    use rayon::prelude::*;
    match thread_cap() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("sweep thread pool");
            pool.install(|| items.par_iter().map(&f).collect())
        }
        None => items.par_iter().map(&f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn pmap<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    items.iter().map(&f).collect()
}
