//! Execution strategy for the data-parallel loops.
//!
//! With the `parallel` feature (default) the parallel strategy runs on the
//! rayon global pool; without it every strategy runs sequentially. Results
//! are identical either way: every parallel loop is a pure map whose output
//! order matches its input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Order-preserving map over a slice.
pub fn map_slice<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Order-preserving map over `0..n`.
pub fn map_range<U, F>(exec: Exec, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

const CHUNK: usize = 8192;

/// Writes `f(src[i])` into `dst[i]`, in chunks when running in parallel.
pub fn map_into<T, U, F>(exec: Exec, src: &[T], dst: &mut [U], f: F)
where
    T: Sync + Copy,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    assert_eq!(src.len(), dst.len());
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => dst.par_chunks_mut(CHUNK).zip(src.par_chunks(CHUNK)).for_each(|(d, s)| {
            for (o, &i) in d.iter_mut().zip(s) {
                *o = f(i);
            }
        }),
        _ => {
            for (o, &i) in dst.iter_mut().zip(src) {
                *o = f(i);
            }
        }
    }
}
