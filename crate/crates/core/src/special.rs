//! Bessel functions of order 0 and 1 and the Hankel functions built from them.
//!
//! Three regimes, all in double precision:
//!
//! * `x <= 8`: ascending power series,
//!   `J0 = sum (-1)^k (x^2/4)^k / (k!)^2` and the logarithmic series for `Y0`, `Y1`
//!   with harmonic-number coefficients.
//! * `8 < x <= 25`: Miller's backward recurrence for `J_n`, normalised with
//!   `1 = J0 + 2 sum J_2k`, and the Neumann series
//!   `Y0 = (2/pi)(ln(x/2) + gamma) J0 - (4/pi) sum (-1)^k J_2k / k`.
//!   The series would lose too many digits to cancellation here, and the
//!   asymptotic expansion cannot yet reach 1e-10.
//! * `x > 25`: Hankel's asymptotic expansion in modulus/phase form,
//!   `H_nu = sqrt(2/(pi x)) (P + iQ) exp(i (x - (nu/2 + 1/4) pi))`, with the
//!   coefficients `a_j(nu) = prod_{i<=j} (4 nu^2 - (2i-1)^2) / (j! 8^j)`,
//!   summed until the terms drop below double precision.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// `[J0, Y0, J1, Y1]` at `x > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Bessel01 {
    pub j0: f64,
    pub y0: f64,
    pub j1: f64,
    pub y1: f64,
}

pub fn bessel01(x: f64) -> Result<Bessel01> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("Y0/Y1 need a positive finite argument, got {x}")));
    }
    Ok(if x <= SERIES_LIMIT {
        series(x)
    } else if x <= ASYMPTOTIC_LIMIT {
        miller(x)
    } else {
        asymptotic(x)
    })
}

pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    bessel01(x).map(|b| b.j0).unwrap_or(f64::NAN)
}

pub fn bessel_j1(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    if x == 0.0 {
        return 0.0;
    }
    s * bessel01(x).map(|b| b.j1).unwrap_or(f64::NAN)
}

pub fn bessel_y0(x: f64) -> Result<f64> {
    bessel01(x).map(|b| b.y0)
}

pub fn bessel_y1(x: f64) -> Result<f64> {
    bessel01(x).map(|b| b.y1)
}

/// `H0^(1)(x) = J0(x) + i Y0(x)`.
pub fn hankel_h0_1(x: f64) -> Result<Complex64> {
    bessel01(x).map(|b| Complex64::new(b.j0, b.y0))
}

/// `H1^(1)(x) = J1(x) + i Y1(x)`.
pub fn hankel_h1_1(x: f64) -> Result<Complex64> {
    bessel01(x).map(|b| Complex64::new(b.j1, b.y1))
}

fn series(x: f64) -> Bessel01 {
    let q = -0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;

    // k = 0 terms
    let mut t0 = 1.0; // (-x^2/4)^k / (k!)^2
    let mut t1 = 1.0; // (-x^2/4)^k / (k! (k+1)!)
    let mut j0 = 1.0;
    let mut j1s = 1.0;
    let mut y0s = 0.0; // sum_{k>=1} -H_k t0
    let mut y1s = 0.0; // sum_{k>=0} (H_k + H_{k+1}) t1
    let mut harmonic = 0.0; // H_k
    y1s += 1.0; // k = 0: H_0 + H_1 = 1
    for k in 1..200 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        j0 += t0;
        j1s += t1;
        y0s -= harmonic * t0;
        y1s += (2.0 * harmonic + 1.0 / (kf + 1.0)) * t1;
        if t0.abs() < 1e-18 * j0.abs().max(1e-3) && t1.abs() < 1e-18 && k > 3 {
            break;
        }
    }
    let j1 = 0.5 * x * j1s;
    let y0 = FRAC_2_PI * (log_term * j0 + y0s);
    // psi(k+1) + psi(k+2) = H_k + H_{k+1} - 2 gamma
    let y1 = -FRAC_2_PI / x + FRAC_2_PI * (0.5 * x).ln() * j1
        - (0.5 * x / PI) * (y1s - 2.0 * EULER_GAMMA * j1s);
    Bessel01 { j0, y0, j1, y1 }
}

fn miller(x: f64) -> Bessel01 {
    let start = 2 * ((x as usize + 40) / 2);
    let mut j = vec![0.0f64; start + 2];
    j[start] = 1e-30;
    for n in (1..=start).rev() {
        j[n - 1] = 2.0 * n as f64 / x * j[n] - j[n + 1];
        if j[n - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(n - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    for v in &mut j {
        *v /= norm;
    }
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k < start {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * (log_term * j[0] - 2.0 * s0);
    let y1 = -FRAC_2_PI * j[0] / x + FRAC_2_PI * log_term * j[1] + FRAC_2_PI * s1;
    Bessel01 { j0: j[0], y0, j1: j[1], y1 }
}

/// `(P, Q)` of Hankel's expansion for order `nu`.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for j in 1..100 {
        let odd = (2 * j - 1) as f64;
        term *= (mu - odd * odd) / (j as f64 * 8.0 * x);
        if term.abs() > prev || term == 0.0 {
            break;
        }
        prev = term.abs();
        // j = 1, 2, 3, 4 ... contribute +Q, -P, -Q, +P ...
        match j % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn asymptotic(x: f64) -> Bessel01 {
    let amp = (FRAC_2_PI / x).sqrt();
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(1.0, x);
    let (s0, c0) = (x - FRAC_PI_4).sin_cos();
    let (s1, c1) = (x - 3.0 * FRAC_PI_4).sin_cos();
    Bessel01 {
        j0: amp * (p0 * c0 - q0 * s0),
        y0: amp * (p0 * s0 + q0 * c0),
        j1: amp * (p1 * c1 - q1 * s1),
        y1: amp * (p1 * s1 + q1 * c1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // x, J0, Y0, J1, Y1 from a 30-digit mpmath evaluation.
    const TABLE: &[[f64; 5]] = &[
        [1e-3, 0.999_999_750_000_015_6, -4.471_416_611_375_923, 0.000_499_999_937_500_002_6, -636.622_167_231_139_4],
        [0.1, 0.997_501_562_066_04, -1.534_238_651_350_366_7, 0.049_937_526_036_242, -6.458_951_094_702_026_6],
        [1.0, 0.765_197_686_557_966_6, 0.088_256_964_215_676_96, 0.440_050_585_744_933_5, -0.781_212_821_300_288_7],
        [2.5, -0.048_383_776_468_198, 0.498_070_359_615_231_9, 0.497_094_102_464_274_05, 0.145_918_137_966_785_8],
        [7.9, 0.194_361_844_841_278_25, 0.206_520_948_144_375_77, 0.219_179_399_921_751_2, -0.181_721_077_280_573_13],
        [8.1, 0.147_517_454_044_377_66, 0.238_091_328_702_234_82, 0.247_607_766_981_592_87, -0.133_148_795_952_495_93],
        [12.0, 0.047_689_310_796_833_535, -0.225_237_312_634_361_45, -0.223_447_104_490_627_6, -0.057_099_218_260_896_52],
        [17.3, -0.133_700_647_075_764_2, -0.137_505_213_443_524_95, -0.141_423_335_492_014, 0.129_785_346_739_083_9],
        [24.9, 0.083_245_968_353_015_5, -0.136_499_183_996_765_22, -0.134_855_699_531_408_86, -0.086_002_557_595_554_25],
        [25.1, 0.108_275_671_499_949_45, -0.116_767_707_638_036_94, -0.114_634_784_134_422_57, -0.110_622_233_227_830_99],
        [40.0, 0.007_366_890_584_237_29, 0.125_936_417_058_260_92, 0.126_038_318_037_585, -0.005_793_505_821_549_633],
        [100.0, 0.019_985_850_304_223_122, -0.077_244_313_365_083_15, -0.077_145_352_014_112_16, -0.020_372_312_002_759_792],
        [1234.5, -0.013_550_379_618_035_721, 0.018_222_995_047_412_552, 0.018_217_508_337_392_5, 0.013_557_761_447_180_334],
        [1e4, -0.007_096_160_353_388_801_5, 0.003_647_805_558_986_605_8, 0.003_647_450_755_529_580_3, 0.007_096_342_752_536_495],
    ];

    #[test]
    fn matches_high_precision_table() {
        for row in TABLE {
            let x = row[0];
            let b = bessel01(x).unwrap();
            // relative to the modulus of the Hankel function, which has no zeros
            let m0 = row[1].hypot(row[2]);
            let m1 = row[3].hypot(row[4]);
            for (got, want, m) in [(b.j0, row[1], m0), (b.y0, row[2], m0), (b.j1, row[3], m1), (b.y1, row[4], m1)] {
                assert!((got - want).abs() <= 1e-10 * m, "x={x}: got {got}, want {want}");
            }
        }
    }

    #[test]
    fn hankel_at_one() {
        let h = hankel_h0_1(1.0).unwrap();
        assert!((h.re - 0.7651976866).abs() < 1e-9);
        assert!((h.im - 0.0882569642).abs() < 1e-9);
    }

    #[test]
    fn singular_points_rejected() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!(hankel_h0_1(0.0).is_err());
        assert!(bessel_y0(-1.0).is_err());
    }

    #[test]
    fn wronskian_identity() {
        for i in 0..100 {
            let x = 0.1 * 1000f64.powf(i as f64 / 99.0);
            let b = bessel01(x).unwrap();
            let w = b.j1 * b.y0 - b.j0 * b.y1;
            let want = 2.0 / (PI * x);
            assert!(((w - want) / want).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn regimes_agree_at_boundaries() {
        for x in [SERIES_LIMIT, ASYMPTOTIC_LIMIT] {
            let a = if x == SERIES_LIMIT { series(x) } else { miller(x) };
            let b = if x == SERIES_LIMIT { miller(x) } else { asymptotic(x) };
            assert!((a.j0 - b.j0).abs() < 1e-12 && (a.y0 - b.y0).abs() < 1e-12);
            assert!((a.j1 - b.j1).abs() < 1e-12 && (a.y1 - b.y1).abs() < 1e-12);
        }
    }

    #[test]
    fn large_argument_modulus() {
        for x in [50.0, 80.0, 300.0, 5000.0] {
            let h = hankel_h0_1(x).unwrap();
            let m = (2.0 / (PI * x)).sqrt();
            assert!((h.norm() - m).abs() / m < 0.01);
        }
    }
}
