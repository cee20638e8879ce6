//! Deterministic data-parallel reductions.
//!
//! Every reduction here splits the index range into fixed-size chunks,
//! accumulates each chunk sequentially in index order, and folds the chunk
//! partials in chunk order. The parallel versions only change *who* computes
//! each chunk partial, never the order of any floating-point addition, so
//! with the `parallel` feature enabled the results are bitwise identical to
//! the sequential fallback for any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk width for the canonical summation order.
pub const CHUNK: usize = 4096;

fn chunk_count(len: usize) -> usize {
    len.div_ceil(CHUNK)
}

fn chunk_range(c: usize, len: usize) -> std::ops::Range<usize> {
    c * CHUNK..((c + 1) * CHUNK).min(len)
}

/// Sum of `f(i)` for `i` in `0..len` in the canonical chunked order.
pub fn indexed_sum_seq<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    let mut total = 0.0;
    for c in 0..chunk_count(len) {
        let mut partial = 0.0;
        for i in chunk_range(c, len) {
            partial += f(i);
        }
        total += partial;
    }
    total
}

#[cfg(feature = "parallel")]
/// Parallel version of [`indexed_sum_seq`]; bitwise identical result.
pub fn indexed_sum_par<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials: Vec<f64> = (0..chunk_count(len))
        .into_par_iter()
        .map(|c| {
            let mut partial = 0.0;
            for i in chunk_range(c, len) {
                partial += f(i);
            }
            partial
        })
        .collect();
    partials.iter().sum()
}

/// Sum of `f(i)` over `0..len`, parallel when the feature is enabled.
pub fn indexed_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        indexed_sum_par(len, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        indexed_sum_seq(len, f)
    }
}

/// Componentwise sum of `dim`-vectors emitted by `f` into `acc`, canonical order.
pub fn indexed_sum_vec_seq<F>(len: usize, dim: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]),
{
    let mut total = vec![0.0; dim];
    for c in 0..chunk_count(len) {
        let mut partial = vec![0.0; dim];
        for i in chunk_range(c, len) {
            f(i, &mut partial);
        }
        for (t, p) in total.iter_mut().zip(&partial) {
            *t += *p;
        }
    }
    total
}

#[cfg(feature = "parallel")]
/// Parallel version of [`indexed_sum_vec_seq`]; bitwise identical result.
pub fn indexed_sum_vec_par<F>(len: usize, dim: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let partials: Vec<Vec<f64>> = (0..chunk_count(len))
        .into_par_iter()
        .map(|c| {
            let mut partial = vec![0.0; dim];
            for i in chunk_range(c, len) {
                f(i, &mut partial);
            }
            partial
        })
        .collect();
    let mut total = vec![0.0; dim];
    for partial in &partials {
        for (t, p) in total.iter_mut().zip(partial) {
            *t += *p;
        }
    }
    total
}

/// Componentwise chunked sum, parallel when the feature is enabled.
pub fn indexed_sum_vec<F>(len: usize, dim: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    #[cfg(feature = "parallel")]
    {
        indexed_sum_vec_par(len, dim, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        indexed_sum_vec_seq(len, dim, f)
    }
}

/// Neumaier compensated sum: the result tracks the true sum to a few ulps
/// regardless of length, which is what normalization checks need when a
/// distribution has 10^5 atoms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Fill `out[i] = f(i)` sequentially.
pub fn fill_indexed_seq<T, F>(out: &mut [T], f: F)
where
    F: Fn(usize) -> T,
{
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = f(i);
    }
}

#[cfg(feature = "parallel")]
/// Parallel fill; element values are independent of scheduling.
pub fn fill_indexed_par<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let base = c * CHUNK;
        for (off, slot) in chunk.iter_mut().enumerate() {
            *slot = f(base + off);
        }
    });
}

/// Fill `out[i] = f(i)`, parallel when the feature is enabled.
pub fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        fill_indexed_par(out, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        fill_indexed_seq(out, f)
    }
}

/// Map `f` over `0..len` into a fresh vector, parallel when enabled.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(usize) -> T + Sync,
{
    let mut out = vec![T::default(); len];
    fill_indexed(&mut out, f);
    out
}
