//! Grid evaluation helpers. With the `parallel` feature the maps run on the
//! rayon pool; without it they fall back to plain iterators. The sequential
//! variants are always available so both paths can be compared.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to every element, in parallel when the feature is enabled.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential reference path.
pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Whether [`map`] dispatches to rayon in this build.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
