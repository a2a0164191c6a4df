//! Halton low-discrepancy points.

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    x
}

/// The `index`-th Halton point in `[0, 1)^dim` (index 0 is skipped by
/// callers that want to avoid the origin corner).
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "Halton sequence supports up to {} dimensions", PRIMES.len());
    (0..dim).map(|k| radical_inverse(index, PRIMES[k])).collect()
}

/// Halton points mapped affinely into the box `[lo, hi]`.
pub fn halton_in_box<'a>(count: usize, lo: &'a [f64], hi: &'a [f64], skip: u64) -> impl Iterator<Item = Vec<f64>> + 'a {
    (0..count as u64).map(move |i| {
        halton(i + skip, lo.len())
            .into_iter()
            .enumerate()
            .map(|(k, u)| lo[k] + u * (hi[k] - lo[k]))
            .collect()
    })
}
