//! Receiver-line DFT `F u(k1) = (2 pi)^(-1/2) (2 l_M / m) sum_j u(x_j) exp(-i x_j k1)`
//! on `x_j = (2 l_M / m) j`, `k1 = (pi / l_M) q`, `j, q` in `-m/2 .. m/2`.
//!
//! With `j' = j + m/2` and `q' = q + m/2`,
//! `exp(-i x_j k1) = exp(-2 pi i j' q' / m) (-1)^(j' + q') exp(-i pi m / 2)`,
//! so the transform is a length-`m` FFT between two sign flips.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::acquisition::Trace;
use crate::error::{ensure, Error, Result};

/// `sqrt(k0^2 - k1^2)` for `|k1| <= k0`.
pub fn kappa(k1: f64, k0: f64) -> Result<f64> {
    ensure!(k0 > 0.0, "k0 must be positive");
    if k1.abs() > k0 {
        return Err(Error::invalid(format!("|k1| = {} exceeds k0 = {k0} (evanescent)", k1.abs())));
    }
    Ok((k0 * k0 - k1 * k1).sqrt())
}

/// Spectrum of a trace: `(k1, F u(k1))` for the `m` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub k1: Vec<f64>,
    pub values: Vec<Complex64>,
}

fn check_uniform(trace: &Trace, half_width: f64) -> Result<f64> {
    let m = trace.len();
    ensure!(m >= 2 && m.is_multiple_of(2), "trace length must be even and >= 2");
    let dx = 2.0 * half_width / m as f64;
    for (j, x) in trace.receiver_x.iter().enumerate() {
        let want = (j as f64 - (m / 2) as f64) * dx;
        ensure!(
            (x - want).abs() <= 1e-9 * half_width,
            "receivers are not on the uniform grid (2 l_M / m) I_m"
        );
    }
    Ok(dx)
}

pub fn trace_dft(trace: &Trace, half_width: f64) -> Result<Spectrum> {
    let dx = check_uniform(trace, half_width)?;
    let m = trace.len();
    let scale = dx / (2.0 * PI).sqrt();
    let mut buf: Vec<Complex64> = trace
        .values
        .iter()
        .enumerate()
        .map(|(j, &u)| if j % 2 == 0 { u } else { -u })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let tail = Complex64::from_polar(scale, -PI * (m / 2) as f64);
    let values = buf
        .into_iter()
        .enumerate()
        .map(|(q, v)| if q % 2 == 0 { v * tail } else { -v * tail })
        .collect();
    Ok(Spectrum { k1: dft_frequencies(m, half_width), values })
}

/// Direct `O(m^2)` evaluation of the same sum.
pub fn trace_dft_direct(trace: &Trace, half_width: f64) -> Result<Spectrum> {
    let dx = check_uniform(trace, half_width)?;
    let m = trace.len();
    let k1 = dft_frequencies(m, half_width);
    let values = k1
        .iter()
        .map(|&k| {
            trace.receiver_x.iter().zip(&trace.values).map(|(&x, &u)| u * Complex64::from_polar(1.0, -x * k)).sum::<Complex64>()
                * (dx / (2.0 * PI).sqrt())
        })
        .collect();
    Ok(Spectrum { k1, values })
}

/// `k1 = (pi / l_M) q` for `q = -m/2 .. m/2 - 1`.
pub fn dft_frequencies(m: usize, half_width: f64) -> Vec<f64> {
    (0..m).map(|q| (q as f64 - (m / 2) as f64) * PI / half_width).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::GaussianSource;

    fn xs(m: usize, l: f64) -> Vec<f64> {
        (0..m).map(|j| (j as f64 - (m / 2) as f64) * 2.0 * l / m as f64).collect()
    }

    #[test]
    fn kappa_values() {
        assert!((kappa(0.0, 2.0 * PI).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert_eq!(kappa(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(kappa(3.0, 5.0).unwrap(), 4.0);
        assert!(kappa(5.1, 5.0).is_err());
    }

    #[test]
    fn constant_trace_hits_only_dc() {
        let t = Trace::new(xs(200, 10.0), 10.0, vec![Complex64::new(1.0, 0.0); 200]).unwrap();
        let s = trace_dft(&t, 10.0).unwrap();
        let dc = s.k1.iter().position(|&k| k == 0.0).unwrap();
        assert!((s.values[dc].re - 20.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((s.values[dc].re - 7.9788).abs() < 1e-4);
        for (q, v) in s.values.iter().enumerate() {
            if q != dc {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn exponential_shifts_to_first_bin() {
        let l = 10.0;
        let x = xs(64, l);
        let vals = x.iter().map(|&x| Complex64::from_polar(1.0, PI / l * x)).collect();
        let s = trace_dft(&Trace::new(x, 0.0, vals).unwrap(), l).unwrap();
        let peak = s.values.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap().0;
        assert!((s.k1[peak] - PI / l).abs() < 1e-12);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let mut rng = GaussianSource::new(5);
        for m in [2, 8, 100, 200] {
            let vals: Vec<Complex64> = (0..m).map(|_| rng.complex()).collect();
            let t = Trace::new(xs(m, 7.0), 1.0, vals).unwrap();
            let a = trace_dft(&t, 7.0).unwrap();
            let b = trace_dft_direct(&t, 7.0).unwrap();
            let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr()).sum();
            let den: f64 = b.values.iter().map(|y| y.norm_sqr()).sum();
            assert!((num / den).sqrt() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonuniform_receivers() {
        let t = Trace::new(vec![-1.0, 0.0, 0.3, 1.0], 0.0, vec![Complex64::default(); 4]).unwrap();
        assert!(trace_dft(&t, 2.0).is_err());
    }
}
