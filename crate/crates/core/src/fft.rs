//! Small 2-D FFT helper over row-major `n x n` complex arrays.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

pub(crate) struct Fft2 {
    n: usize,
    plan: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(n: usize, direction: FftDirection) -> Self {
        let plan = FftPlanner::new().plan_fft(n, direction);
        Self { n, plan }
    }

    /// Unnormalised transform along both axes, in place.
    pub(crate) fn process(&self, data: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        let mut scratch = vec![Complex64::default(); self.plan.get_inplace_scratch_len()];
        // rows are contiguous
        self.plan.process_with_scratch(data, &mut scratch);
        let mut col = vec![Complex64::default(); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            self.plan.process_with_scratch(&mut col, &mut scratch);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let n = 6;
        let data: Vec<Complex64> =
            (0..n * n).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos())).collect();
        let mut fast = data.clone();
        Fft2::new(n, FftDirection::Forward).process(&mut fast);
        for k2 in 0..n {
            for k1 in 0..n {
                let mut s = Complex64::default();
                for j2 in 0..n {
                    for j1 in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((k1 * j1 + k2 * j2) as f64) / n as f64;
                        s += data[j2 * n + j1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((s - fast[k2 * n + k1]).norm() < 1e-12);
            }
        }
    }
}
