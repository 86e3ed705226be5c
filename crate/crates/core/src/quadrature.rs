//! Quadrature rules: composite trapezoid weights, Gauss–Legendre nodes and a
//! globally adaptive Gauss–Kronrod (7/15) integrator.

// Kronrod nodes and weights are kept at their published precision.
#![allow(clippy::excessive_precision)]

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{KreinError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// One Gauss–Kronrod 7/15 panel on `[a, b]`.
pub fn gauss_kronrod_15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Estimate { value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Globally adaptive integration on `[a, b]`: the panel with the largest
/// error estimate is bisected until the summed estimate drops below
/// `abs_tol` or `max_panels` is reached. The result may be unconverged;
/// compare `error` against the caller's threshold.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> Estimate {
    let mut panels: Vec<(f64, f64, Estimate)> = Vec::with_capacity(64);
    panels.push((a, b, gauss_kronrod_15(&mut f, a, b)));
    // panels too narrow to bisect keep their estimate but leave the work list
    let mut frozen = Estimate { value: 0.0, error: 0.0 };
    loop {
        let total_err: f64 = frozen.error + panels.iter().map(|p| p.2.error).sum::<f64>();
        if total_err <= abs_tol || panels.len() >= max_panels {
            break;
        }
        let (worst, _) =
            panels
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, p)| if p.2.error > acc.1 { (i, p.2.error) } else { acc });
        let (lo, hi, est) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            frozen.value += est.value;
            frozen.error += est.error;
            if panels.is_empty() {
                break;
            }
            continue;
        }
        panels.push((lo, mid, gauss_kronrod_15(&mut f, lo, mid)));
        panels.push((mid, hi, gauss_kronrod_15(&mut f, mid, hi)));
    }
    // sum small panels first for a little extra accuracy
    panels.sort_by(|x, y| x.2.value.abs().partial_cmp(&y.2.value.abs()).unwrap_or(core::cmp::Ordering::Equal));
    Estimate {
        value: frozen.value + panels.iter().map(|p| p.2.value).sum::<f64>(),
        error: frozen.error + panels.iter().map(|p| p.2.error).sum::<f64>(),
    }
}

/// `∫₀^∞ f(r) dr` through `r = scale·tan(u)`.
pub fn adaptive_half_line<F: FnMut(f64) -> f64>(mut f: F, scale: f64, abs_tol: f64, max_panels: usize) -> Estimate {
    adaptive(
        |u: f64| {
            let t = u.tan();
            let c = u.cos();
            let jac = scale / (c * c);
            if !jac.is_finite() {
                return 0.0;
            }
            f(scale * t) * jac
        },
        0.0,
        FRAC_PI_2,
        abs_tol,
        max_panels,
    )
}

/// Turn an unconverged estimate into an error.
pub fn require(est: Estimate, threshold: f64) -> Result<f64> {
    if est.error.is_finite() && est.error <= threshold && est.value.is_finite() {
        Ok(est.value)
    } else {
        Err(KreinError::QuadratureNotConverged { estimate: est.error })
    }
}

/// Composite trapezoid weights on `n` equally spaced nodes with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = alloc::vec![h; n];
    if n > 0 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    if n == 1 {
        w[0] = 0.0;
    }
    w
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let pi = core::f64::consts::PI;
    for i in 0..n.div_ceil(2) {
        let mut z = (pi * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_panel_is_exact_for_polynomials() {
        let est = gauss_kronrod_15(&mut |x: f64| x.powi(20) + 3.0 * x, 0.0, 1.0);
        assert!((est.value - (1.0 / 21.0 + 1.5)).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let est = adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 2000);
        assert!((est.value - 2.0).abs() < 1e-9, "{est:?}");
        assert!(require(est, 1e-8).is_ok());
    }

    #[test]
    fn half_line_exponential() {
        let est = adaptive_half_line(|r: f64| (-2.0 * r).exp(), 1.0, 1e-12, 500);
        assert!((est.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn half_line_algebraic_tail() {
        // ∫ 1/(1+r²) = π/2
        let est = adaptive_half_line(|r: f64| 1.0 / (1.0 + r * r), 1.0, 1e-12, 500);
        assert!((est.value - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn unconverged_is_reported() {
        let est = adaptive(|x: f64| 1.0 / x, 1e-300, 1.0, 1e-14, 8);
        assert!(matches!(require(est, 1e-8), Err(KreinError::QuadratureNotConverged { .. })));
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let w = trapezoid_weights(11, 0.1);
        let s: f64 = w.iter().enumerate().map(|(i, w)| w * (2.0 * i as f64 * 0.1 + 1.0)).sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_degree() {
        for n in [1usize, 2, 5, 12, 33] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 2;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }
}
