//! Data-parallel helpers. With the `parallel` feature these run on rayon;
//! without it they fall back to the sequential versions in [`seq`], which are
//! always compiled so benchmarks can compare both paths.

/// Sequential reference implementations.
pub mod seq {
    pub fn map_range<T, F>(n: u64, f: F) -> Vec<T>
    where
        F: Fn(u64) -> T,
    {
        (0..n).map(f).collect()
    }

    pub fn filter_range<F>(n: u64, keep: F) -> Vec<u64>
    where
        F: Fn(u64) -> bool,
    {
        (0..n).filter(|&i| keep(i)).collect()
    }

    pub fn map_vec<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
    where
        F: Fn(T) -> R,
    {
        items.into_iter().map(f).collect()
    }

    pub fn sum_range<F>(n: u64, f: F) -> u64
    where
        F: Fn(u64) -> u64,
    {
        (0..n).map(f).sum()
    }
}

/// Rayon-backed implementations.
#[cfg(feature = "parallel")]
pub mod par {
    use rayon::prelude::*;

    pub fn map_range<T, F>(n: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }

    pub fn filter_range<F>(n: u64, keep: F) -> Vec<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        // collect preserves index order
        (0..n).into_par_iter().filter(|&i| keep(i)).collect()
    }

    pub fn map_vec<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        items.into_par_iter().map(f).collect()
    }

    pub fn sum_range<F>(n: u64, f: F) -> u64
    where
        F: Fn(u64) -> u64 + Sync + Send,
    {
        (0..n).into_par_iter().map(f).sum()
    }
}

#[cfg(feature = "parallel")]
pub use par::{filter_range, map_range, map_vec, sum_range};

#[cfg(not(feature = "parallel"))]
pub use seq::{filter_range, map_range, map_vec, sum_range};

/// Whether this build uses the rayon path.
pub const PARALLEL: bool = cfg!(feature = "parallel");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_matches_sequential() {
        let f = |i: u64| i * i % 17;
        assert_eq!(map_range(1000, f), seq::map_range(1000, f));
        assert_eq!(
            filter_range(1000, |i| i % 7 == 3),
            seq::filter_range(1000, |i| i % 7 == 3)
        );
        assert_eq!(sum_range(1000, f), seq::sum_range(1000, f));
    }
}
