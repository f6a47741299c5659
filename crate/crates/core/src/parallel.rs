//! Order-preserving map that fans out across threads when the `parallel`
//! feature is enabled and degrades to a plain sequential map otherwise.
//!
//! Both paths produce outputs in input order, so downstream results are
//! identical regardless of the mode or worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Caps the worker pool at `n` threads. Returns false when the pool was
/// already started or the build is sequential; safe to ignore.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> bool {
    false
}
