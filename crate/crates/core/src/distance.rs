//! Euclidean distance kernels shared by partition construction and point location.
//!
//! Summation uses eight interleaved accumulators (`s0..s7` over coordinates
//! `k ≡ 0..7 mod 8`), combined pairwise as
//! `((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))`, followed by the tail in order.
//! Every distance in the crate goes through this order, so radii and membership
//! tests agree bit for bit.

const LANES: usize = 8;

#[inline(always)]
fn accumulate(acc: &mut [f64; LANES], a: &[f64], b: &[f64]) {
    for (x, y) in a.chunks_exact(LANES).zip(b.chunks_exact(LANES)) {
        let x: &[f64; LANES] = x.try_into().unwrap();
        let y: &[f64; LANES] = y.try_into().unwrap();
        let mut diff = [0.0f64; LANES];
        for k in 0..LANES {
            diff[k] = x[k] - y[k];
        }
        for k in 0..LANES {
            acc[k] += diff[k] * diff[k];
        }
    }
}

#[inline(always)]
fn combine(acc: &[f64; LANES]) -> f64 {
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

#[inline(always)]
fn finish(acc: &[f64; LANES], a: &[f64], b: &[f64]) -> f64 {
    let mut sum = combine(acc);
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        sum += diff * diff;
    }
    sum
}

#[inline(always)]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let full = a.len() - a.len() % LANES;
    accumulate(&mut acc, &a[..full], &b[..full]);
    finish(&acc, &a[full..], &b[full..])
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Block size between early-exit checks in [`squared_euclidean_bounded`].
const BLOCK: usize = 32;

/// Same value as [`squared_euclidean`], or `None` once the partial sum exceeds `bound`.
///
/// Accumulators are only ever increased, so a partial sum above `bound` implies the
/// full sum is too. Returned values are bit-identical to the unbounded kernel.
#[inline(always)]
pub fn squared_euclidean_bounded(a: &[f64], b: &[f64], bound: f64) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let full = a.len() - a.len() % LANES;
    let mut start = 0;
    while start < full {
        let end = (start + BLOCK).min(full);
        accumulate(&mut acc, &a[start..end], &b[start..end]);
        start = end;
        if start < full && combine(&acc) > bound {
            return None;
        }
    }
    Some(finish(&acc, &a[full..], &b[full..]))
}
