//! One centre at the origin and radial fields. With `u = rφ` everything
//! reduces to a half-line problem: the free resolvent becomes the Dirichlet
//! one, and the boundary condition `θζ = φ₀(0)` becomes `u′(0) = 4πθ u(0)`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use super::{free_green, PointConfig};
use crate::error::{KreinError, Result};
use crate::halfline::{decay_check, dirichlet_convolve, exp_moment, HalfLineGrid, RobinWaveSystem};
use crate::krein::{cayley_step, SpectralParam};
use crate::linalg::{c, CMatrix, CVector};
use crate::quadrature::{adaptive, adaptive_half_line, require};

/// Nodes used by the linear fit `rφ ≈ ζ/(4π) + φ₀(0)·r`.
pub const FIT_NODES: usize = 8;

/// Samples at `r_i = i·h`, `i = 1..=N`, with an optional charge (the
/// coefficient of `1/(4πr)`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGridField {
    h: f64,
    values: Vec<f64>,
    zeta: Option<f64>,
}

impl RadialGridField {
    pub fn new(h: f64, values: Vec<f64>, zeta: Option<f64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(KreinError::InvalidInput(format!("radial spacing must be positive, got {h}")));
        }
        if values.len() < 20 {
            return Err(KreinError::GridTooCoarse(format!("{} radial nodes, need at least 20", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) || zeta.is_some_and(|z| !z.is_finite()) {
            return Err(KreinError::InvalidInput("radial samples must be finite".into()));
        }
        Ok(RadialGridField { h, values, zeta })
    }

    /// Samples `f` on `(0, r_max]`.
    pub fn from_fn(h: f64, r_max: f64, f: impl Fn(f64) -> f64, zeta: Option<f64>) -> Result<Self> {
        let n = (r_max / h).round() as usize;
        Self::new(h, (1..=n).map(|i| f(i as f64 * h)).collect(), zeta)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn r(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn zeta(&self) -> Option<f64> {
        self.zeta
    }

    fn half_line(&self) -> Result<HalfLineGrid> {
        HalfLineGrid::new(self.h, self.r_max())
    }

    /// `rφ` on the half-line nodes `0..=N`; the value at 0 is the quadratic
    /// extrapolation `3u₁ − 3u₂ + u₃`.
    fn weighted(&self) -> Vec<Complex64> {
        let mut u = Vec::with_capacity(self.len() + 1);
        u.push(c(0.0));
        u.extend(self.values.iter().enumerate().map(|(i, v)| c(v * self.r(i))));
        u[0] = u[1] * 3.0 - u[2] * 3.0 + u[3];
        u
    }

    fn from_weighted(h: f64, u: &[Complex64], zeta: Option<f64>) -> Self {
        let values = u[1..].iter().enumerate().map(|(i, v)| v.re / ((i + 1) as f64 * h)).collect();
        RadialGridField { h, values, zeta }
    }
}

/// Least-squares line through `(r_i, r_iφ_i)` on the first [`FIT_NODES`]
/// nodes: returns `(ζ, φ₀(0))`.
pub fn charge_fit(field: &RadialGridField) -> (f64, f64) {
    let k = FIT_NODES.min(field.len());
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..k {
        let r = field.r(i);
        let u = r * field.values[i];
        sx += r;
        sy += u;
        sxx += r * r;
        sxy += r * u;
    }
    let kf = k as f64;
    let slope = (kf * sxy - sx * sy) / (kf * sxx - sx * sx);
    let intercept = (sy - slope * sx) / kf;
    (4.0 * PI * intercept, slope)
}

/// `|θζ − φ₀(0)|` with both read off by [`charge_fit`].
pub fn boundary_residual(theta: f64, field: &RadialGridField) -> f64 {
    let (zeta, phi0) = charge_fit(field);
    (theta * zeta - phi0).abs()
}

/// `(G_λ * ψ)(r) = (1/r)∫ D_λ(r, s) sψ(s) ds` with the Dirichlet kernel `D_λ`.
pub fn radial_free_convolve(lambda: f64, psi: &RadialGridField) -> Result<RadialGridField> {
    SpectralParam::positive(lambda)?;
    let grid = psi.half_line()?;
    let f = psi.weighted();
    decay_check(&grid, lambda, &[&f])?;
    Ok(RadialGridField::from_weighted(psi.h, &dirichlet_convolve(&grid, lambda, &f), Some(0.0)))
}

/// `(−Δ_θ + λ²)⁻¹ψ = G_λ*ψ + ⟨G_λ, ψ⟩/(θ + λ/4π) · G_λ` for one centre at
/// the origin. The output carries its charge.
pub fn radial_resolvent_apply(theta: f64, lambda: f64, psi: &RadialGridField) -> Result<RadialGridField> {
    if !(theta > 0.0) {
        return Err(KreinError::NotPositiveDefinite("θ"));
    }
    let mut out = radial_free_convolve(lambda, psi)?;
    let grid = psi.half_line()?;
    let coeff = exp_moment(&grid, lambda, &psi.weighted()).re / (theta + lambda / (4.0 * PI));
    for (i, v) in out.values.iter_mut().enumerate() {
        *v += coeff * free_green(lambda, (i + 1) as f64 * psi.h);
    }
    out.zeta = Some(coeff);
    Ok(out)
}

/// `max |−u″ + λ²u − rψ|` with `u = rφ`, over nodes `2..N−1`.
///
/// This is `r` times the defect of `(−Δ + λ²)φ = ψ`. Without the factor `r`
/// an `O(h²)` error in `u` turns into `O(h)` next to the origin.
pub fn radial_defect(lambda: f64, phi: &RadialGridField, psi: &RadialGridField) -> f64 {
    let h = phi.h;
    let u: Vec<f64> = phi.values.iter().enumerate().map(|(i, v)| v * phi.r(i)).collect();
    (1..u.len() - 1).fold(0.0, |a, i| {
        let lap = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (h * h);
        a.max((-lap + lambda * lambda * u[i] - phi.r(i) * psi.values[i]).abs())
    })
}

/// `G_λ + λ²(−Δ)⁻¹G_λ` at `r`, with the inverse Laplacian done by adaptive
/// quadrature. Equals `1/(4πr)` for every λ.
pub fn singular_profile(lambda: f64, r: f64) -> Result<f64> {
    SpectralParam::positive(lambda)?;
    // (−Δ)⁻¹ of a radial f is (1/r)∫ min(r, s) s f(s) ds
    let tol = 1e-15;
    let inner = require(adaptive(|s| s * (-lambda * s).exp() / (4.0 * PI), 0.0, r, tol, 200), 1e-12)?;
    let outer = require(adaptive_half_line(|t| (-lambda * (r + t)).exp() / (4.0 * PI), 1.0 / lambda, tol, 200), 1e-12)?;
    Ok(free_green(lambda, r) + lambda * lambda * (inner + r * outer) / r)
}

/// `‖∇φ₀‖² + θ|ζ|²` for a single centre, with `‖∇φ₀‖² = 4π∫|(rφ₀)′|² dr`
/// by difference quotients.
pub fn quadratic_form(cfg: &PointConfig, phi0: &RadialGridField, zeta: f64) -> Result<f64> {
    if cfg.n() != 1 {
        return Err(KreinError::InvalidInput("the radial form needs exactly one centre".into()));
    }
    let theta = cfg.theta()[(0, 0)].re;
    let mut prev = 0.0;
    let mut grad = 0.0;
    for (i, v) in phi0.values.iter().enumerate() {
        let u = v * phi0.r(i);
        grad += (u - prev).powi(2) / phi0.h;
        prev = u;
    }
    Ok(4.0 * PI * grad + theta * zeta * zeta)
}

/// A radial wave state: position, velocity and the charge of the position.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub phi: RadialGridField,
    pub psi: RadialGridField,
    pub zeta: f64,
}

impl RadialState {
    pub fn zeros(h: f64, r_max: f64) -> Result<Self> {
        let z = RadialGridField::from_fn(h, r_max, |_| 0.0, Some(0.0))?;
        Ok(RadialState { phi: z.clone(), psi: z, zeta: 0.0 })
    }

    fn system(&self, theta: f64) -> Result<RobinWaveSystem> {
        let grid = self.phi.half_line()?;
        Ok(RobinWaveSystem::new(grid, CMatrix::from_element(1, 1, c(4.0 * PI * theta))))
    }

    /// `(u, v) = (rφ, rψ)` with `u(0) = ζ/4π`; `v(0)` comes from the charge of
    /// ψ when it has one.
    fn to_flat(&self) -> CVector {
        let mut u = self.phi.weighted();
        u[0] = c(self.zeta / (4.0 * PI));
        let mut v = self.psi.weighted();
        if let Some(z) = self.psi.zeta {
            v[0] = c(z / (4.0 * PI));
        }
        CVector::from_iterator(2 * u.len(), u.into_iter().chain(v))
    }

    fn from_flat(h: f64, x: &CVector) -> Self {
        let n = x.len() / 2;
        let (u, v) = x.as_slice().split_at(n);
        RadialState {
            phi: RadialGridField::from_weighted(h, u, Some(4.0 * PI * u[0].re)),
            psi: RadialGridField::from_weighted(h, v, Some(4.0 * PI * v[0].re)),
            zeta: 4.0 * PI * u[0].re,
        }
    }
}

/// `‖∇φ₀‖² + ‖ψ‖² + θζ²`, the discrete energy conserved by [`evolve_radial`].
pub fn radial_energy(theta: f64, state: &RadialState) -> Result<f64> {
    Ok(4.0 * PI * state.system(theta)?.energy(&state.to_flat()))
}

/// How far a state is from the domain: the fitted `φ₀(0)` against `θζ`, the
/// fitted charge against `ζ`, and `φ(r_max)` against 0.
pub fn radial_domain_residual(theta: f64, state: &RadialState) -> f64 {
    let (zeta_fit, phi0) = charge_fit(&state.phi);
    let end = state.phi.values.last().copied().unwrap_or(0.0).abs();
    (theta * state.zeta - phi0).abs().max((zeta_fit - state.zeta).abs()).max(end)
}

/// Cayley steps of the point-interaction wave equation for one centre; calls
/// `visit` on the initial state and after every step.
pub fn evolve_radial_with(
    theta: f64,
    state: &RadialState,
    dt: f64,
    steps: usize,
    threshold: f64,
    mut visit: impl FnMut(usize, &RadialState),
) -> Result<RadialState> {
    if !(theta > 0.0) {
        return Err(KreinError::NotPositiveDefinite("θ"));
    }
    if state.phi.len() != state.psi.len() || state.phi.h != state.psi.h {
        return Err(KreinError::InvalidInput("position and velocity grids differ".into()));
    }
    let residual = radial_domain_residual(theta, state);
    if !(residual <= threshold) {
        return Err(KreinError::DomainViolation { residual, threshold });
    }
    let sys = state.system(theta)?;
    let resolve = |l: SpectralParam, x: &CVector| sys.resolve(l, x);
    let mut x = state.to_flat();
    visit(0, state);
    for step in 1..=steps {
        x = cayley_step(&resolve, dt, &x)?;
        visit(step, &RadialState::from_flat(state.phi.h, &x));
    }
    Ok(RadialState::from_flat(state.phi.h, &x))
}

pub fn evolve_radial(
    theta: f64,
    state: &RadialState,
    dt: f64,
    steps: usize,
    threshold: f64,
) -> Result<Vec<RadialState>> {
    let mut out = Vec::with_capacity(steps + 1);
    evolve_radial_with(theta, state, dt, steps, threshold, |_, s| out.push(s.clone()))?;
    Ok(out)
}
