//! Order-preserving map that runs on the rayon pool when available.

#[cfg(feature = "parallel")]
pub(crate) fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Runs `job` on a dedicated pool of `workers` threads, or on the global pool
/// for `None`.
#[cfg(feature = "parallel")]
pub(crate) fn with_workers<R: Send>(workers: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    match workers {
        None => job(),
        Some(n) => match rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
        {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn with_workers<R>(_workers: Option<usize>, job: impl FnOnce() -> R) -> R {
    job()
}
