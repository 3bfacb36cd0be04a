//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel map in the crate goes through here so that the `parallel`
//! feature can be switched off without touching call sites. Results are always
//! collected in input order, so output is identical in both modes.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for the data-parallel loops.
///
/// `Parallel` silently degrades to `Sequential` when the crate is built
/// without the `parallel` feature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

pub fn map_range<R, F>(mode: Parallelism, range: Range<u64>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return range.into_par_iter().map(f).collect();
    }
    let _ = mode;
    range.map(f).collect()
}

pub fn map_slice<T, R, F>(mode: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Splits `[lo, hi)` into consecutive chunks of at most `chunk` cells.
pub fn chunks(lo: i64, hi: i64, chunk: i64) -> Vec<(i64, i64)> {
    let chunk = chunk.max(1);
    let mut out = Vec::new();
    let mut start = lo;
    while start < hi {
        let end = (start + chunk).min(hi);
        out.push((start, end));
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_preserve_order() {
        let seq = map_range(Parallelism::Sequential, 0..1000, |i| i * i);
        let par = map_range(Parallelism::Parallel, 0..1000, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[17], 289);
    }

    #[test]
    fn chunking_covers_range() {
        let c = chunks(-5, 12, 4);
        assert_eq!(c.first(), Some(&(-5, -1)));
        assert_eq!(c.last(), Some(&(11, 12)));
        assert_eq!(c.iter().map(|(a, b)| b - a).sum::<i64>(), 17);
        assert!(chunks(3, 3, 4).is_empty());
    }
}
