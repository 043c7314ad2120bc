//! Execution strategy for embarrassingly parallel sweeps.
//!
//! With the default `parallel` feature the maps below fan out over rayon's
//! global pool; without it they run sequentially. Callers pass a closure of
//! the sample index, seed their RNG from that index (see [`crate::rng`]),
//! and get results back in index order, so the two modes are
//! indistinguishable from the outside.

/// Maps `f` over `0..count`, returning results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..count`, returning results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(count, f)
}

/// Sequential reference implementation of [`map_indexed`].
///
/// Always available so benchmarks can compare the two paths within one
/// build of the crate.
pub fn map_indexed_seq<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Fallible variant of [`map_indexed`]: stops at the first error.
#[cfg(feature = "parallel")]
pub fn try_map_indexed<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

/// Fallible variant of [`map_indexed`]: stops at the first error.
#[cfg(not(feature = "parallel"))]
pub fn try_map_indexed<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        let out = map_indexed(100, |i| i * i);
        let expected: Vec<usize> = (0..100).map(|i| i * i).collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn parallel_matches_sequential() {
        let par = map_indexed(64, |i| (i as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let seq = map_indexed_seq(64, |i| (i as u64).wrapping_mul(0x9e3779b97f4a7c15));
        assert_eq!(par, seq);
    }

    #[test]
    fn empty_range_yields_empty_vec() {
        let out: Vec<u8> = map_indexed(0, |_| unreachable!());
        assert!(out.is_empty());
    }

    #[test]
    fn try_map_collects_or_fails() {
        let ok: Result<Vec<usize>, &str> = try_map_indexed(10, |i| Ok(i + 1));
        assert_eq!(ok.unwrap(), (1..=10).collect::<Vec<_>>());
        let err: Result<Vec<usize>, String> =
            try_map_indexed(10, |i| if i == 7 { Err(format!("unit {i}")) } else { Ok(i) });
        assert_eq!(err.unwrap_err(), "unit 7");
    }
}
