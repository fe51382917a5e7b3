//! Data-parallel helpers with a sequential fallback.
//!
//! Everything the crate parallelizes is a pure map over independent inputs
//! followed by an order-preserving collect, so the two implementations are
//! observationally identical and outputs never depend on worker count.

#[cfg(feature = "parallel")]
pub(crate) fn map_vec<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_vec<I, T, F>(items: Vec<I>, f: F) -> Vec<T>
where
    F: Fn(I) -> T,
{
    items.into_iter().map(f).collect()
}
