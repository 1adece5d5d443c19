//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon; without it they
//! run on the calling thread. Every reduction offered here is either
//! order-independent (max/min) or chunked with a fixed chunk size, so results
//! are bit-identical regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed chunk length for deterministic floating-point sums.
const SUM_CHUNK: usize = 512;
/// Below this many elements rayon is not worth the dispatch.
#[cfg(feature = "parallel")]
const MIN_PAR_LEN: usize = 1024;

/// Maps `f` over `0..n`, preserving order.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible ordered map; the first error by index wins.
pub fn try_map_indices<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indices(n, f).into_iter().collect()
}

/// Element-wise fill of `out[i] = f(i)`.
pub fn fill<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if out.len() >= MIN_PAR_LEN {
            out.par_iter_mut()
                .with_min_len(MIN_PAR_LEN)
                .enumerate()
                .for_each(|(i, o)| *o = f(i));
            return;
        }
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

/// Deterministic sum of `f(i)` over `0..n`: fixed-size chunks are summed
/// independently, then the partials are added left to right.
pub fn sum_indices<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(SUM_CHUNK);
    let partial = |c: usize| {
        let lo = c * SUM_CHUNK;
        let hi = (lo + SUM_CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = if n >= MIN_PAR_LEN {
        (0..chunks).into_par_iter().map(partial).collect()
    } else {
        (0..chunks).map(partial).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = (0..chunks).map(partial).collect();
    partials.into_iter().sum()
}

/// Index and value of the maximum of `f` over `0..n` (ties go to the lowest
/// index). NaN values are ignored. Returns `None` for an empty range.
pub fn argmax<F>(n: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let better = |a: (usize, f64), b: (usize, f64)| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) || a.1.is_nan() {
            b
        } else {
            a
        }
    };
    let values = map_indices(n, |i| (i, f(i)));
    values
        .into_iter()
        .filter(|(_, v)| !v.is_nan())
        .reduce(better)
}

/// Index and value of the minimum of `f` over `0..n`.
pub fn argmin<F>(n: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    argmax(n, |i| -f(i)).map(|(i, v)| (i, -v))
}

/// Minimum of `f` over `0..n`, `+inf` when empty.
pub fn min_of<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .with_min_len(256)
            .map(f)
            .reduce(|| f64::INFINITY, f64::min)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).fold(f64::INFINITY, f64::min)
    }
}

/// Maximum of `f` over `0..n`, `-inf` when empty.
pub fn max_of<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    -min_of(n, |i| -f(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_chunk_deterministic() {
        let n = 10_007;
        let a = sum_indices(n, |i| (i as f64).sin());
        let b = sum_indices(n, |i| (i as f64).sin());
        assert_eq!(a.to_bits(), b.to_bits());
        let naive: f64 = (0..n).map(|i| (i as f64).sin()).sum();
        assert!((a - naive).abs() < 1e-9);
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        let v = [1.0, 3.0, 3.0, 2.0];
        assert_eq!(argmax(v.len(), |i| v[i]), Some((1, 3.0)));
        assert_eq!(argmin(v.len(), |i| v[i]), Some((0, 1.0)));
        assert_eq!(argmax(0, |_| 0.0), None);
    }

    #[test]
    fn extrema_and_fill() {
        assert_eq!(max_of(5, |i| i as f64), 4.0);
        assert_eq!(min_of(0, |i| i as f64), f64::INFINITY);
        let mut out = vec![0.0; 3000];
        fill(&mut out, |i| 2.0 * i as f64);
        assert_eq!(out[2999], 5998.0);
    }
}
