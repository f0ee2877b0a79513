//! Data-parallel helpers with a sequential fallback.
//!
//! Every hot loop in the crate funnels through [`map_indexed`] or
//! [`for_each_mut`]. With the `parallel` feature (default) these dispatch to
//! rayon; without it they run sequentially. Results are written into
//! index-addressed slots, so output is bitwise identical in both modes and
//! independent of thread count.
//!
//! [`set_sequential_override`] forces sequential execution at runtime even in
//! a parallel build. Benchmarks use it to compare both modes in one run.

use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

static SEQUENTIAL_OVERRIDE: AtomicBool = AtomicBool::new(false);

/// Force all `parallel`-feature helpers to run sequentially when `true`.
pub fn set_sequential_override(sequential: bool) {
    SEQUENTIAL_OVERRIDE.store(sequential, Ordering::SeqCst);
}

/// Whether helpers currently run sequentially.
pub fn is_sequential() -> bool {
    if cfg!(not(feature = "parallel")) {
        return true;
    }
    SEQUENTIAL_OVERRIDE.load(Ordering::SeqCst)
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Applies `f(i, &mut slot[i])` over a mutable slice.
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            items
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, item)| f(i, item));
            return;
        }
    }
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item);
    }
}

/// Configure the global thread pool size. Call once, before any parallel work.
/// Returns `false` when the pool was already initialized or the feature is off.
pub fn configure_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_indexed_preserves_order() {
        let v = map_indexed(100, |i| i * i);
        assert_eq!(v[7], 49);
        assert_eq!(v.len(), 100);
    }

    #[test]
    fn sequential_override_matches_parallel() {
        let par = map_indexed(1000, |i| (i as f64).sqrt().sin());
        set_sequential_override(true);
        let seq = map_indexed(1000, |i| (i as f64).sqrt().sin());
        set_sequential_override(false);
        assert_eq!(par, seq);
    }
}
