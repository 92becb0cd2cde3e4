//! Compensated accumulation and fixed-partition reductions.
//!
//! Every parallel reduction in the crate splits its input into chunks whose
//! boundaries depend only on the input length, reduces each chunk
//! sequentially, and folds the chunk results in index order. The result is
//! therefore identical for any worker count.

use rayon::prelude::*;

/// Chunk length used by the deterministic reductions.
pub const REDUCE_CHUNK: usize = 4096;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<NeumaierSum>().value()
}

/// Inner product with a thread-count independent reduction order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let partials: Vec<NeumaierSum> = a
        .par_chunks(REDUCE_CHUNK)
        .zip(b.par_chunks(REDUCE_CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).collect())
        .collect();
    let mut total = NeumaierSum::new();
    for p in &partials {
        total.merge(p);
    }
    total.value()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `(d-1)^(half_exponent/2)`, evaluated as one exponential of a multiple of
/// `ln(d-1)`.
pub fn sqrt_power(base: f64, half_exponent: i64) -> f64 {
    (half_exponent as f64 * 0.5 * base.ln()).exp()
}

pub fn relative_error(value: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        value.abs()
    } else {
        ((value - expected) / expected).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(&v), 2.0);
        assert_eq!(v.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn dot_is_chunking_independent() {
        let a: Vec<f64> = (0..10_000).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..10_000).map(|i| (i as f64 * 0.11).cos()).collect();
        let reference: NeumaierSum = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        assert!((dot(&a, &b) - reference.value()).abs() < 1e-12);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let x = one.install(|| dot(&a, &b));
        let y = four.install(|| dot(&a, &b));
        assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn sqrt_power_matches_integer_powers() {
        assert!(relative_error(sqrt_power(2.0, 4), 4.0) < 1e-15);
        assert!(relative_error(sqrt_power(3.0, -3), 3f64.powf(-1.5)) < 1e-15);
        assert_eq!(sqrt_power(5.0, 0), 1.0);
    }
}
