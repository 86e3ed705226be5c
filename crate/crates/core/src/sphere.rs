//! Spherical means about the origin and the trace `τ̄φ = lim_{R↓0} ⟨φ⟩_R`.
//!
//! Fourier input uses `⟨e^{ik·x}⟩_R = sin(R|k|)/(R|k|)`, which is exact for
//! band-limited fields. Grid input uses a Gauss–Legendre × trapezoid rule on
//! the sphere and tricubic Lagrange interpolation.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{invalid, KreinError, Result};
use crate::pointwave3d::Grid3;
use crate::quadrature::gauss_legendre;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// `⟨φ⟩_R` for `φ(x) = Σ c_k e^{ik·x}`.
pub fn sphere_average_fourier(samples: &[([f64; 3], Complex64)], radius: f64) -> Result<Complex64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid(alloc::format!("sphere radius must be positive, got {radius}")));
    }
    Ok(samples.iter().map(|(k, coeff)| coeff * sinc(radius * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt())).sum())
}

/// Cubic Lagrange weights at offset `t ∈ [0, 1)` from the second of four
/// equally spaced nodes.
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Tricubic interpolation of grid samples; `None` outside the region where a
/// full 4×4×4 stencil exists.
pub fn interpolate(grid: &Grid3, values: &[f64], p: [f64; 3]) -> Option<f64> {
    let n = grid.n();
    let h = grid.h();
    let x0 = grid.coord(0);
    let mut base = [0usize; 3];
    let mut w = [[0.0; 4]; 3];
    for a in 0..3 {
        let s = (p[a] - x0) / h;
        let i = s.floor();
        if !(i >= 1.0) || i + 2.0 > (n - 1) as f64 {
            return None;
        }
        base[a] = i as usize - 1;
        w[a] = cubic_weights(s - i);
    }
    let mut sum = 0.0;
    for (dk, wk) in w[2].iter().enumerate() {
        for (dj, wj) in w[1].iter().enumerate() {
            let row = grid.index(base[0], base[1] + dj, base[2] + dk);
            let inner: f64 = w[0].iter().enumerate().map(|(di, wi)| wi * values[row + di]).sum();
            sum += wk * wj * inner;
        }
    }
    Some(sum)
}

/// `⟨φ⟩_R` for grid samples, centred at the origin. `R` must exceed two grid
/// spacings and the sphere must stay inside the interpolation region.
pub fn sphere_average_grid(grid: &Grid3, values: &[f64], radius: f64) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(invalid(alloc::format!("field has {} samples, grid {}", values.len(), grid.len())));
    }
    let min = 2.0 * grid.h();
    if !(radius > min) {
        return Err(KreinError::RTooSmall { radius, min });
    }
    // enough nodes to sample the interpolant on the sphere at grid resolution
    let n_theta = ((PI * radius / grid.h()).ceil() as usize + 8).min(256);
    let n_phi = 2 * n_theta;
    let (mu, wmu) = gauss_legendre(n_theta);
    let mut sum = 0.0;
    for (m, wm) in mu.iter().zip(&wmu) {
        let st = (1.0 - m * m).max(0.0).sqrt();
        for j in 0..n_phi {
            let ph = 2.0 * PI * (j as f64 + 0.5) / n_phi as f64;
            let p = [radius * st * ph.cos(), radius * st * ph.sin(), radius * m];
            let f = interpolate(grid, values, p).ok_or_else(|| invalid("sphere leaves the grid"))?;
            sum += wm * f;
        }
    }
    Ok(sum / (2.0 * n_phi as f64))
}

/// Extrapolated `R → 0` limit with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEstimate {
    pub value: f64,
    pub error: f64,
}

/// Neville extrapolation of `⟨φ⟩_R` to `R = 0` in powers of `R`.
///
/// The error estimate is the change of the diagonal entry when the last
/// radius is added. If the estimates grow under refinement the averages do
/// not settle and the field is outside the domain of the trace.
pub fn tau_bar(radii: &[f64], averages: &[f64]) -> Result<TraceEstimate> {
    if radii.len() < 3 || radii.len() != averages.len() {
        return Err(invalid("need at least three radii with one average each"));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) || radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("radii must be positive and strictly decreasing"));
    }
    if averages.iter().any(|a| !a.is_finite()) {
        return Err(KreinError::NotInDomain("sphere average is not finite"));
    }
    let n = radii.len();
    let mut table: Vec<f64> = averages.to_vec();
    let mut diagonal = Vec::with_capacity(n);
    diagonal.push(averages[0]);
    // after pass m, table[i] holds the degree-m extrapolant through radii i..=i+m
    for m in 1..n {
        for i in 0..n - m {
            let (ri, rm) = (radii[i], radii[i + m]);
            table[i] = (rm * table[i] - ri * table[i + 1]) / (rm - ri);
        }
        diagonal.push(table[0]);
    }
    let errors: Vec<f64> = diagonal.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = averages.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let last = errors[errors.len() - 1];
    let prev = errors[errors.len() - 2];
    if last > prev && last > 1e-12 * scale {
        return Err(KreinError::NotInDomain("sphere averages do not converge as R → 0"));
    }
    Ok(TraceEstimate { value: diagonal[n - 1], error: last })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_weights_reproduce_cubics() {
        for t in [0.0, 0.25, 0.7] {
            let w = cubic_weights(t);
            let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
            let val: f64 = (0..4).map(|i| w[i] * f(i as f64 - 1.0)).sum();
            assert!((val - f(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn neville_is_exact_on_polynomials() {
        let radii = [0.4, 0.2, 0.1, 0.05];
        let avg: Vec<f64> = radii.iter().map(|r| 2.0 + 3.0 * r - r * r).collect();
        let t = tau_bar(&radii, &avg).unwrap();
        assert!((t.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(tau_bar(&[0.1, 0.2, 0.3], &[1.0, 1.0, 1.0]).is_err());
        assert!(tau_bar(&[0.2, 0.1], &[1.0, 1.0]).is_err());
        assert!(sphere_average_fourier(&[], 0.0).is_err());
    }
}
