//! Point interactions in R³: `−Δ` perturbed at finitely many centres, and
//! the wave equation it generates.
//!
//! Domain elements are `φ = φ₀ + Σ ζ_i G(· − y_i)` with `G = 1/(4π|x|)` and the
//! boundary conditions `φ₀(y_i) = Σ_j Θ_ij ζ_j`.

mod grid3;
mod radial;

pub use grid3::*;
pub use radial::*;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{KreinError, Result};
use crate::linalg::{c, guarded_inverse, hermitian_eigenvalues, hermitian_part_residual, mat_max_abs, CMatrix};

/// `∫_{[−½,½]³} dx/|x| = 3 ln(2+√3) − π/2`.
pub fn unit_cube_coulomb() -> f64 {
    3.0 * (2.0 + 3.0f64.sqrt()).ln() - PI / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    centers: Vec<[f64; 3]>,
    theta: CMatrix,
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl PointConfig {
    pub fn new(centers: Vec<[f64; 3]>, theta: CMatrix) -> Result<Self> {
        let n = centers.len();
        if n == 0 || theta.nrows() != n || theta.ncols() != n {
            return Err(KreinError::InvalidInput(format!("need n ≥ 1 centres and an n×n Θ (n = {n})")));
        }
        for (i, a) in centers.iter().enumerate() {
            if a.iter().any(|v| !v.is_finite()) {
                return Err(KreinError::InvalidInput("centre coordinates must be finite".into()));
            }
            for b in &centers[i + 1..] {
                if !(distance(a, b) > 0.0) {
                    return Err(KreinError::InvalidInput("centres must be distinct".into()));
                }
            }
        }
        if hermitian_part_residual(&theta) > 1e-12 * mat_max_abs(&theta).max(1.0) {
            return Err(KreinError::InvalidInput("Θ is not Hermitian".into()));
        }
        if hermitian_eigenvalues(&theta)[0] <= 0.0 {
            return Err(KreinError::NotPositiveDefinite("Θ"));
        }
        Ok(PointConfig { centers, theta })
    }

    /// One centre at the origin.
    pub fn single(theta: f64) -> Result<Self> {
        Self::new(alloc::vec![[0.0; 3]], CMatrix::from_element(1, 1, c(theta)))
    }

    pub fn n(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[[f64; 3]] {
        &self.centers
    }

    pub fn theta(&self) -> &CMatrix {
        &self.theta
    }
}

/// `e^{−λr}/(4πr)`; `λ = 0` is the Coulomb kernel.
pub fn free_green(lambda: f64, r: f64) -> f64 {
    (-lambda * r).exp() / (4.0 * PI * r)
}

fn off_diagonal(cfg: &PointConfig, kernel: impl Fn(f64) -> f64) -> CMatrix {
    let n = cfg.n();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(0.0) } else { c(kernel(distance(&cfg.centers[i], &cfg.centers[j]))) })
}

/// `Θ_Y`: `1/(4π|y_i − y_j|)` off the diagonal.
pub fn theta_y(cfg: &PointConfig) -> CMatrix {
    off_diagonal(cfg, |d| free_green(0.0, d))
}

/// `M(λ)`: `e^{−λ|y_i − y_j|}/(4π|y_i − y_j|)` off the diagonal.
pub fn m_matrix(cfg: &PointConfig, lambda: f64) -> CMatrix {
    off_diagonal(cfg, |d| free_green(lambda, d))
}

/// `Θ + Θ_Y + λ/4π − M(λ)`, the matrix inverted by the resolvent correction.
pub fn coupling_matrix(cfg: &PointConfig, lambda: f64) -> CMatrix {
    let n = cfg.n();
    &cfg.theta + theta_y(cfg) + CMatrix::identity(n, n) * c(lambda / (4.0 * PI)) - m_matrix(cfg, lambda)
}

/// `Γ_Θ(λ) = −(1/λ)(Θ + Θ_Y + λ/4π − M(λ))`.
pub fn gamma_matrix(cfg: &PointConfig, lambda: f64) -> Result<CMatrix> {
    crate::krein::SpectralParam::positive(lambda)?;
    let g = coupling_matrix(cfg, lambda) * c(-1.0 / lambda);
    guarded_inverse(&g)?;
    Ok(g)
}
