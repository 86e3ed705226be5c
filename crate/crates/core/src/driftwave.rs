//! A point source dragged with constant velocity `v`, `|v| < 1`: the wave
//! equation with `C₁ = C₂ = L_v = v·∇` perturbed at the origin.
//!
//! Four values of `Γ^v_θ(λ)` are provided:
//!
//! * [`gamma_closed`], the closed form as usually quoted;
//! * [`gamma_quadrature`], adaptive quadrature of the `(r, s)` double integral
//!   it is derived from;
//! * [`gamma_from_s_integral`], the same double integral with the `r`
//!   integral done exactly. It agrees with the quadrature and not with
//!   [`gamma_closed`];
//! * [`gamma_operator`], the value fixed by the Krein formula of the operator
//!   itself, where the `φ` component of `G(λ)ζ` carries `(λ − 2L_v)` rather
//!   than `(λ − L_v)`. Checked against Fourier lattice models.

use alloc::vec::Vec;
use core::cell::Cell;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{invalid, KreinError, Result};
use crate::krein::SpectralParam;
use crate::linalg::{c, CMatrix, CVector};
use crate::matrix_model::MatrixModel;
use crate::quadrature::{adaptive, adaptive_half_line, require};

/// Error estimate above which [`gamma_quadrature`] gives up.
pub const QUADRATURE_THRESHOLD: f64 = 1e-8;
const PANEL_TOL: f64 = 1e-10;
const MAX_PANELS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftConfig {
    v: [f64; 3],
    theta: f64,
}

impl DriftConfig {
    /// `|v| < 1` and `θ ≥ 0`. `v = 0` is the undragged point interaction.
    pub fn new(v: [f64; 3], theta: f64) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) || !theta.is_finite() {
            return Err(invalid("drift velocity and θ must be finite"));
        }
        let speed = norm(&v);
        if !(speed < 1.0) {
            return Err(invalid(alloc::format!("drift speed must be below 1, got {speed}")));
        }
        if theta < 0.0 {
            return Err(KreinError::NotPositiveDefinite("θ must be nonnegative"));
        }
        Ok(DriftConfig { v, theta })
    }

    pub fn v(&self) -> [f64; 3] {
        self.v
    }

    pub fn speed(&self) -> f64 {
        norm(&self.v)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.v, theta)
    }
}

fn norm(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Liénard–Wiechert kernel `1/(4π√(|x|² − |v∧x|²))`.
pub fn lw_green(cfg: &DriftConfig, x: [f64; 3]) -> Result<f64> {
    let r2 = dot(&x, &x);
    if !(r2 > 0.0) {
        return Err(invalid("the kernel is singular at x = 0"));
    }
    let w = cross(&cfg.v, &x);
    Ok(1.0 / (4.0 * PI * (r2 - dot(&w, &w)).sqrt()))
}

/// `1/(|k|² + (iv·k + λ)²)`, without the `(2π)^{-3/2}` of the transform.
pub fn gv_symbol(cfg: &DriftConfig, lambda: f64, k: [f64; 3]) -> Complex64 {
    let w = Complex64::new(lambda, dot(&cfg.v, &k));
    (c(dot(&k, &k)) + w * w).inv()
}

/// `(1/|v|)·ln((1+|v|)/(1−|v|))`, equal to 2 at `v = 0`.
fn log_ratio(v: f64) -> f64 {
    if v < 1e-4 {
        2.0 + 2.0 * v * v / 3.0 + 2.0 * v.powi(4) / 5.0
    } else {
        ((1.0 + v) / (1.0 - v)).ln() / v
    }
}

fn lambda_ok(lambda: f64) -> Result<f64> {
    Ok(SpectralParam::positive(lambda)?.value())
}

/// `−(1/λ)(θ + (|λ|/16π)(1/(1−|v|²) + (3/2)(1/|v|)ln((1+|v|)/(1−|v|))))`.
pub fn gamma_closed(cfg: &DriftConfig, lambda: f64) -> Result<f64> {
    let l = lambda_ok(lambda)?;
    let v = cfg.speed();
    Ok(-(cfg.theta + l.abs() / (16.0 * PI) * (1.0 / (1.0 - v * v) + 1.5 * log_ratio(v))) / l)
}

/// The double integral behind [`gamma_closed`] with the `r` integral done
/// exactly: `−(1/λ)(θ + (λ/8π)(1/(1−|v|²) + (1/2|v|)ln((1+|v|)/(1−|v|))))`.
pub fn gamma_from_s_integral(cfg: &DriftConfig, lambda: f64) -> Result<f64> {
    let l = lambda_ok(lambda)?;
    let v = cfg.speed();
    Ok(-(cfg.theta + l / (8.0 * PI) * (1.0 / (1.0 - v * v) + 0.5 * log_ratio(v))) / l)
}

/// `−(1/λ)(θ + λ/(4π(1−|v|²)))`.
pub fn gamma_operator(cfg: &DriftConfig, lambda: f64) -> Result<f64> {
    let l = lambda_ok(lambda)?;
    let v = cfg.speed();
    Ok(-(cfg.theta + l / (4.0 * PI * (1.0 - v * v))) / l)
}

/// `∫₀^{|v|} ds ∫₀^∞ dr w(s) f(r, s)` by nested adaptive Gauss–Kronrod, `s`
/// outside and `r = λ tan u` inside. Returns the value and an error bound.
fn double_integral(
    v: f64,
    lambda: f64,
    weight: impl Fn(f64) -> f64,
    f: impl Fn(f64, f64) -> f64,
) -> Result<(f64, f64)> {
    let inner_err = Cell::new(0.0f64);
    let failed = Cell::new(false);
    let outer = adaptive(
        |s| {
            let est = adaptive_half_line(|r| f(r, s), lambda, PANEL_TOL, MAX_PANELS);
            if !est.value.is_finite() || est.error > QUADRATURE_THRESHOLD {
                failed.set(true);
            }
            let w = weight(s);
            inner_err.set(inner_err.get().max(est.error * w.abs()));
            w * est.value
        },
        0.0,
        v,
        PANEL_TOL,
        MAX_PANELS,
    );
    let error = outer.error + v * inner_err.get();
    if failed.get() || !outer.value.is_finite() {
        return Err(KreinError::QuadratureNotConverged { estimate: error.max(inner_err.get()) });
    }
    Ok((outer.value, error))
}

fn quartic(r: f64, s: f64, lambda: f64) -> f64 {
    let a = (1.0 - s * s) * r * r + lambda * lambda;
    a * a + 4.0 * lambda * lambda * r * r * s * s
}

/// `−(θ/λ + (2λ/((2π)²|v|))∫₀^∞dr∫₀^{|v|}ds ((1+s²)r²+λ²)/((1−s²)(((1−s²)r²+λ²)² + 4λ²r²s²)))`.
pub fn gamma_quadrature(cfg: &DriftConfig, lambda: f64) -> Result<f64> {
    let l = lambda_ok(lambda)?;
    let v = cfg.speed();
    if !(v > 0.0) {
        return Err(invalid("the (r, s) representation needs |v| > 0"));
    }
    let (val, err) =
        double_integral(v, l, |s| 1.0 / (1.0 - s * s), |r, s| ((1.0 + s * s) * r * r + l * l) / quartic(r, s, l))?;
    let pref = 2.0 * l / (4.0 * PI * PI * v);
    require(crate::quadrature::Estimate { value: val, error: err * pref }, QUADRATURE_THRESHOLD)?;
    Ok(-(cfg.theta / l + pref * val))
}

/// `τ̄ L_v(G^v * G^v_λ) = −(4λ/((2π)²|v|))∫₀^∞dr∫₀^{|v|}ds (s²/(1−s²)) r²/(((1−s²)r²+λ²)² + 4λ²r²s²)`.
pub fn trace_lv_quadrature(cfg: &DriftConfig, lambda: f64) -> Result<f64> {
    let l = lambda_ok(lambda)?;
    let v = cfg.speed();
    if !(v > 0.0) {
        return Err(invalid("the (r, s) representation needs |v| > 0"));
    }
    let (val, err) = double_integral(v, l, |s| s * s / (1.0 - s * s), |r, s| r * r / quartic(r, s, l))?;
    let pref = 4.0 * l / (4.0 * PI * PI * v);
    require(crate::quadrature::Estimate { value: val, error: err * pref }, QUADRATURE_THRESHOLD)?;
    Ok(-pref * val)
}

/// Closed form of [`trace_lv_quadrature`]:
/// `−(1/8π|v|)(|v|/(1−|v|²) − ½ln((1+|v|)/(1−|v|)))`, independent of λ.
pub fn trace_lv_closed(cfg: &DriftConfig) -> f64 {
    let v = cfg.speed();
    if v < 1e-4 {
        // the bracket is (2/3)v³ + (4/5)v⁵ + …
        return -(v * v * (2.0 / 3.0 + 0.8 * v * v)) / (8.0 * PI);
    }
    -(v / (1.0 - v * v) - 0.5 * v * log_ratio(v)) / (8.0 * PI * v)
}

/// One row of the closed-form/quadrature comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRow {
    pub lambda: f64,
    pub v: f64,
    pub theta: f64,
    pub gamma_closed: f64,
    pub gamma_quadrature: f64,
    pub rel_err: f64,
}

/// Both Γ values at `v = (|v|, 0, 0)`.
pub fn gamma_row(lambda: f64, v: f64, theta: f64) -> Result<GammaRow> {
    let cfg = DriftConfig::new([v, 0.0, 0.0], theta)?;
    let closed = gamma_closed(&cfg, lambda)?;
    let quad = gamma_quadrature(&cfg, lambda)?;
    Ok(GammaRow {
        lambda,
        v,
        theta,
        gamma_closed: closed,
        gamma_quadrature: quad,
        rel_err: (closed - quad).abs() / quad.abs(),
    })
}

/// The validation grid λ ∈ {0.5, 1, 2} × |v| ∈ {0.1, 0.3, 0.5, 0.7, 0.9} × θ ∈ {0, 1}.
pub fn validation_grid() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for lambda in [0.5, 1.0, 2.0] {
        for v in [0.1, 0.3, 0.5, 0.7, 0.9] {
            for theta in [0.0, 1.0] {
                out.push((lambda, v, theta));
            }
        }
    }
    out
}

/// Periodic box `[0, L)³` truncated to Fourier modes `0 < |k| ≤ K`. The
/// constant mode is left out so that `B = |k|` stays invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLattice {
    box_len: f64,
    cutoff: f64,
    modes: Vec<[f64; 3]>,
}

impl FourierLattice {
    pub fn new(box_len: f64, cutoff: f64) -> Result<Self> {
        if !(box_len > 0.0) || !(cutoff > 0.0) || !box_len.is_finite() || !cutoff.is_finite() {
            return Err(invalid("lattice needs a positive box length and cutoff"));
        }
        let dk = 2.0 * PI / box_len;
        let m = (cutoff / dk).floor() as i64;
        let mut modes = Vec::new();
        for i in -m..=m {
            for j in -m..=m {
                for l in -m..=m {
                    let k = [i as f64 * dk, j as f64 * dk, l as f64 * dk];
                    let k2 = dot(&k, &k);
                    if k2 > 0.0 && k2 <= cutoff * cutoff * (1.0 + 1e-12) {
                        modes.push(k);
                    }
                }
            }
        }
        if modes.is_empty() {
            return Err(invalid("cutoff keeps no lattice mode"));
        }
        Ok(FourierLattice { box_len, cutoff, modes })
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn modes(&self) -> &[[f64; 3]] {
        &self.modes
    }

    /// `L³`: coefficients `a_k` in the basis `e^{ik·x}/L^{3/2}` give
    /// `φ(0) = Σ a_k / L^{3/2}`.
    pub fn volume(&self) -> f64 {
        self.box_len.powi(3)
    }
}

/// The drifted wave equation on a lattice as a matrix model:
/// `B = |k|`, `C₁ = C₂ = iv·k`, `τ = L^{-3/2}(1, …, 1)`, `Θ = θ`.
pub fn lattice_model(cfg: &DriftConfig, lattice: &FourierLattice) -> Result<MatrixModel> {
    if !(cfg.theta > 0.0) {
        return Err(KreinError::NotPositiveDefinite("the lattice model needs θ > 0"));
    }
    let b: Vec<f64> = lattice.modes.iter().map(norm).collect();
    let drift: Vec<Complex64> = lattice.modes.iter().map(|k| Complex64::new(0.0, dot(&cfg.v, k))).collect();
    let cm = CMatrix::from_diagonal(&CVector::from_vec(drift));
    let n = b.len();
    let tau = CMatrix::from_element(1, n, c(1.0 / lattice.volume().sqrt()));
    MatrixModel::new(b, cm.clone(), cm, tau, CMatrix::from_element(1, 1, c(cfg.theta)))
}

/// `Γ` of the lattice model summed mode by mode:
/// `−θ/λ − L⁻³ Σ_k (λ − 2iv·k)/(B_C²(B_C² − 2iλv·k + λ²))`, `B_C² = |k|² − (v·k)²`.
pub fn gamma_lattice(cfg: &DriftConfig, lambda: f64, lattice: &FourierLattice) -> Result<Complex64> {
    let l = lambda_ok(lambda)?;
    let sum: Complex64 = lattice
        .modes
        .iter()
        .map(|k| {
            let w = dot(&cfg.v, k);
            let bc2 = dot(k, k) - w * w;
            Complex64::new(l, -2.0 * w) / (Complex64::new(bc2 + l * l, -2.0 * l * w) * bc2)
        })
        .sum();
    Ok(c(-cfg.theta / l) - sum / lattice.volume())
}

/// Leading part of what the cutoff `|k| ≤ K` removes from [`gamma_lattice`],
/// `−λ/(2π²K(1−|v|²)²)`. The summand decays like `λ(1+3s²)/(|k|⁴(1−s²)³)`
/// with `s = v·k/|k|`.
pub fn gamma_lattice_tail(cfg: &DriftConfig, lambda: f64, cutoff: f64) -> f64 {
    let v = cfg.speed();
    -lambda / (2.0 * PI * PI * cutoff * (1.0 - v * v).powi(2))
}

/// Fourier samples `(k, c_k)` of `L_v(G^v * G^v_λ)` on a lattice, with
/// `φ(x) = Σ c_k e^{ik·x}`.
pub fn lv_convolution_samples(
    cfg: &DriftConfig,
    lambda: f64,
    lattice: &FourierLattice,
) -> Result<Vec<([f64; 3], Complex64)>> {
    let l = lambda_ok(lambda)?;
    let vol = lattice.volume();
    Ok(lattice
        .modes
        .iter()
        .map(|k| {
            let w = dot(&cfg.v, k);
            let bc2 = dot(k, k) - w * w;
            let coeff = Complex64::new(0.0, w) / (Complex64::new(bc2 + l * l, -2.0 * l * w) * bc2) / vol;
            (*k, coeff)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(v: f64, theta: f64) -> DriftConfig {
        DriftConfig::new([v, 0.0, 0.0], theta).unwrap()
    }

    #[test]
    fn closed_form_value() {
        let g = gamma_closed(&cfg(0.5, 0.0), 1.0).unwrap();
        let exact = -(4.0 / 3.0 + 3.0 * 3.0f64.ln()) / (16.0 * PI);
        assert!((g - exact).abs() < 1e-15);
        assert!((g + 0.0920944).abs() < 1e-7);
        assert!((gamma_closed(&cfg(0.5, 1.0), 1.0).unwrap() - (g - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn config_rejections() {
        assert!(DriftConfig::new([1.0, 0.0, 0.0], 1.0).is_err());
        assert!(DriftConfig::new([0.6, 0.8, 0.0], 1.0).is_err());
        assert!(DriftConfig::new([0.1, 0.0, 0.0], -1.0).is_err());
        assert!(gamma_closed(&cfg(0.5, 0.0), -1.0).is_err());
    }

    #[test]
    fn log_ratio_series_joins() {
        let v = 0.99e-4;
        let a = log_ratio(v);
        let b = ((1.0 + v) / (1.0 - v)).ln() / v;
        assert!((a - b).abs() < 1e-10);
    }
}
