//! Finite-dimensional model `(B, C₁, C₂, τ, Θ)`.
//!
//! Every abstract operator becomes a dense matrix. Hatted and barred
//! extensions collapse onto the same matrices. Because `Ran τ*` always meets
//! the energy space here, the extensions built below are pseudo-resolvents:
//! their range is `N_Θ = {τφ = Θζ}` and their kernel its Gram complement.

mod extension;
mod families;
mod random;
pub mod suite;

use alloc::vec::Vec;
#[cfg(test)]
use num_complex::Complex64;

use crate::error::{invalid, KreinError, Result};
use crate::krein::{GramMatrix, SpectralParam};
use crate::linalg::{
    block_diag, c, diag_real, hermitian_eigenvalues, hermitian_sqrt, inverse, mat_max_abs, mat_max_diff, CMatrix,
    CVector,
};

pub use extension::*;
pub use families::{AThetaFamily, GeneralizedThetaFamily, ThetaFamily};
pub use suite::{run_identity_suite, SuiteConfig};

/// Relative tolerance for the structural checks in [`MatrixModel::new`].
const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixModel {
    b: Vec<f64>,
    c1: CMatrix,
    c2: CMatrix,
    tau: CMatrix,
    theta: CMatrix,
}

/// `(φ, ψ, ζ)` split of a flat state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyVector {
    pub phi: CVector,
    pub psi: CVector,
    pub zeta: CVector,
}

impl EnergyVector {
    pub fn from_flat(x: &CVector, n: usize, m: usize) -> Self {
        EnergyVector {
            phi: x.rows(0, n).into_owned(),
            psi: x.rows(n, n).into_owned(),
            zeta: if x.len() >= 2 * n + m { x.rows(2 * n, m).into_owned() } else { CVector::zeros(0) },
        }
    }

    pub fn to_flat(&self) -> CVector {
        let n = self.phi.len();
        let m = self.zeta.len();
        let mut x = CVector::zeros(2 * n + m);
        x.rows_mut(0, n).copy_from(&self.phi);
        x.rows_mut(n, n).copy_from(&self.psi);
        x.rows_mut(2 * n, m).copy_from(&self.zeta);
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramVariant {
    /// `‖Bφ‖² + ‖ψ‖²`
    Plain,
    /// plain plus `⟨Θζ, ζ⟩`
    Theta,
    /// `‖B_Cφ‖² + ‖ψ‖²`, the plain product of the scale generated by `B_C`
    PlainBc,
    /// `PlainBc` plus `⟨Θζ, ζ⟩`
    ThetaBc,
    /// `‖B_Cφ‖² + ‖ψ + C₂φ‖²`
    CWeighted,
    /// `CWeighted` plus `⟨Θζ, ζ⟩`
    CWeightedTheta,
}

impl MatrixModel {
    pub fn new(b: Vec<f64>, c1: CMatrix, c2: CMatrix, tau: CMatrix, theta: CMatrix) -> Result<Self> {
        let n = b.len();
        let m = tau.nrows();
        if n == 0 || m == 0 || m > n {
            return Err(invalid("need 1 <= m <= N"));
        }
        if b.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(invalid("B must have strictly positive finite diagonal"));
        }
        for (name, mtx) in [("C1", &c1), ("C2", &c2)] {
            if mtx.shape() != (n, n) {
                return Err(invalid(alloc::format!("{name} must be N x N")));
            }
        }
        if tau.ncols() != n || theta.shape() != (m, m) {
            return Err(invalid("tau must be m x N and Theta m x m"));
        }
        let model = MatrixModel { b, c1, c2, tau, theta };
        let scale = 1.0 + mat_max_abs(&model.c1).max(mat_max_abs(&model.c2));
        let bm = model.b_matrix();
        for (name, cj) in [("C1", &model.c1), ("C2", &model.c2)] {
            if mat_max_abs(&(cj + cj.adjoint())) > STRUCTURE_TOL * scale {
                return Err(invalid(alloc::format!("{name} is not skew-Hermitian")));
            }
            if mat_max_diff(&(&bm * cj), &(cj * &bm)) > STRUCTURE_TOL * scale * scale {
                return Err(invalid(alloc::format!("{name} does not commute with B")));
            }
        }
        if mat_max_diff(&(&model.c1 * &model.c2), &(&model.c2 * &model.c1)) > STRUCTURE_TOL * scale * scale {
            return Err(invalid("C1 and C2 do not commute"));
        }
        let (k1, k2) = model.relative_bounds();
        if !(k1 * k2 < 1.0) {
            return Err(invalid(alloc::format!("relative bounds violate c1*c2 < 1 ({k1} * {k2})")));
        }
        let s = model.tau.clone().svd(false, false).singular_values;
        let smax = s.iter().cloned().fold(0.0, f64::max);
        let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smin > 1e-10 * smax) {
            return Err(invalid("tau must have full row rank"));
        }
        if mat_max_abs(&(&model.theta - model.theta.adjoint())) > STRUCTURE_TOL * (1.0 + mat_max_abs(&model.theta)) {
            return Err(invalid("Theta must be Hermitian"));
        }
        if !(hermitian_eigenvalues(&model.theta)[0] > 0.0) {
            return Err(invalid("Theta must be positive definite"));
        }
        Ok(model)
    }

    /// Same model with `C₁ = C₂ = 0`.
    pub fn without_drift(&self) -> Self {
        let n = self.n();
        MatrixModel { c1: CMatrix::zeros(n, n), c2: CMatrix::zeros(n, n), ..self.clone() }
    }

    /// Same model with a different `Θ`.
    pub fn with_theta(&self, theta: CMatrix) -> Result<Self> {
        MatrixModel::new(self.b.clone(), self.c1.clone(), self.c2.clone(), self.tau.clone(), theta)
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn m(&self) -> usize {
        self.tau.nrows()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c1(&self) -> &CMatrix {
        &self.c1
    }

    pub fn c2(&self) -> &CMatrix {
        &self.c2
    }

    pub fn tau(&self) -> &CMatrix {
        &self.tau
    }

    pub fn theta(&self) -> &CMatrix {
        &self.theta
    }

    /// `c_j = ‖C_j B⁻¹‖₂`.
    pub fn relative_bounds(&self) -> (f64, f64) {
        let binv = diag_real(&self.b.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
        let norm = |m: CMatrix| m.svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max);
        (norm(&self.c1 * &binv), norm(&self.c2 * &binv))
    }

    pub fn b_matrix(&self) -> CMatrix {
        diag_real(&self.b)
    }

    pub fn b2(&self) -> CMatrix {
        diag_real(&self.b.iter().map(|x| x * x).collect::<Vec<_>>())
    }

    pub fn b_inv2(&self) -> CMatrix {
        diag_real(&self.b.iter().map(|x| 1.0 / (x * x)).collect::<Vec<_>>())
    }

    /// `C = C₁ + C₂`.
    pub fn c_total(&self) -> CMatrix {
        &self.c1 + &self.c2
    }

    /// `B_C² = B² + C₁C₂`.
    pub fn bc2(&self) -> CMatrix {
        let m = self.b2() + &self.c1 * &self.c2;
        (&m + m.adjoint()) * c(0.5)
    }

    pub fn bc(&self) -> CMatrix {
        hermitian_sqrt(&self.bc2()).expect("B_C^2 is positive definite for a valid model")
    }

    pub fn bc_inv2(&self) -> CMatrix {
        inverse(&self.bc2())
    }

    /// `R₀(λ) = (B² + λ²)⁻¹`.
    pub fn r0(&self, lambda: SpectralParam) -> CMatrix {
        let l2 = lambda.value() * lambda.value();
        diag_real(&self.b.iter().map(|x| 1.0 / (x * x + l2)).collect::<Vec<_>>())
    }

    /// `R(λ) = (B_C² − λC + λ²)⁻¹`.
    pub fn r_gen(&self, lambda: SpectralParam) -> CMatrix {
        let l = lambda.value();
        let n = self.n();
        inverse(&(self.bc2() - self.c_total() * c(l) + CMatrix::identity(n, n) * c(l * l)))
    }

    /// `(φ, ψ) ↦ (ψ, −B²φ)`.
    pub fn free_generator(&self) -> CMatrix {
        let n = self.n();
        let mut w = CMatrix::zeros(2 * n, 2 * n);
        w.view_mut((0, n), (n, n)).fill_with_identity();
        w.view_mut((n, 0), (n, n)).copy_from(&(-self.b2()));
        w
    }

    /// `(φ, ψ) ↦ (ψ, Cψ − B_C²φ)`.
    pub fn generalized_generator(&self) -> CMatrix {
        let n = self.n();
        let mut w = CMatrix::zeros(2 * n, 2 * n);
        w.view_mut((0, n), (n, n)).fill_with_identity();
        w.view_mut((n, 0), (n, n)).copy_from(&(-self.bc2()));
        w.view_mut((n, n), (n, n)).copy_from(&self.c_total());
        w
    }

    /// `(φ, ψ) ↦ (C₂φ + ψ, C₁ψ − B²φ)`.
    pub fn c_split_generator(&self) -> CMatrix {
        let n = self.n();
        let mut w = CMatrix::zeros(2 * n, 2 * n);
        w.view_mut((0, 0), (n, n)).copy_from(&self.c2);
        w.view_mut((0, n), (n, n)).fill_with_identity();
        w.view_mut((n, 0), (n, n)).copy_from(&(-self.b2()));
        w.view_mut((n, n), (n, n)).copy_from(&self.c1);
        w
    }

    /// `S(φ, ψ) = (φ, ψ − C₂φ)`.
    pub fn s_map(&self) -> CMatrix {
        let n = self.n();
        let mut s = CMatrix::identity(2 * n, 2 * n);
        s.view_mut((n, 0), (n, n)).copy_from(&(-&self.c2));
        s
    }

    /// Extends a `2N × 2N` map by `extra` on the charge block.
    pub fn with_charge_block(&self, a: &CMatrix, extra: &CMatrix) -> CMatrix {
        block_diag(&[a, extra])
    }
}

/// Gram matrix of the requested energy inner product.
pub fn energy_gram(model: &MatrixModel, variant: GramVariant) -> Result<GramMatrix> {
    let n = model.n();
    let with_theta = |g: CMatrix| block_diag(&[&g, model.theta()]);
    let pair = |phi_block: CMatrix| block_diag(&[&phi_block, &CMatrix::identity(n, n)]);
    let cweighted = || -> Result<CMatrix> {
        let (k1, k2) = model.relative_bounds();
        if !(k1 * k2 < 1.0) {
            return Err(KreinError::NotPositiveDefinite("relative bounds violate c1*c2 < 1"));
        }
        let c2 = model.c2();
        let mut g = CMatrix::zeros(2 * n, 2 * n);
        g.view_mut((0, 0), (n, n)).copy_from(&(model.bc2() + c2.adjoint() * c2));
        g.view_mut((0, n), (n, n)).copy_from(&c2.adjoint());
        g.view_mut((n, 0), (n, n)).copy_from(c2);
        g.view_mut((n, n), (n, n)).fill_with_identity();
        Ok(g)
    };
    let g = match variant {
        GramVariant::Plain => pair(model.b2()),
        GramVariant::Theta => with_theta(pair(model.b2())),
        GramVariant::PlainBc => pair(model.bc2()),
        GramVariant::ThetaBc => with_theta(pair(model.bc2())),
        GramVariant::CWeighted => cweighted()?,
        GramVariant::CWeightedTheta => with_theta(cweighted()?),
    };
    if !(hermitian_eigenvalues(&g)[0] > 0.0) {
        return Err(KreinError::NotPositiveDefinite("Gram matrix has a non-positive eigenvalue"));
    }
    Ok(GramMatrix(g))
}

/// Block formula `(λR₀φ + R₀ψ, −φ + λ²R₀φ + λR₀ψ)` as a `2N × 2N` matrix.
pub fn free_wave_resolvent(model: &MatrixModel, lambda: SpectralParam) -> CMatrix {
    let n = model.n();
    let l = c(lambda.value());
    let r0 = model.r0(lambda);
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&(&r0 * l));
    out.view_mut((0, n), (n, n)).copy_from(&r0);
    out.view_mut((n, 0), (n, n)).copy_from(&(&r0 * (l * l) - CMatrix::identity(n, n)));
    out.view_mut((n, n), (n, n)).copy_from(&(&r0 * l));
    out
}

/// Block formula of the generalized resolvent with `R(λ) = (B_C² − λC + λ²)⁻¹`.
pub fn generalized_resolvent(model: &MatrixModel, lambda: SpectralParam) -> CMatrix {
    let n = model.n();
    let l = c(lambda.value());
    let r = model.r_gen(lambda);
    let rc = &r * model.c_total();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&(&r * l - &rc));
    out.view_mut((0, n), (n, n)).copy_from(&r);
    out.view_mut((n, 0), (n, n)).copy_from(&(&r * (l * l) - &rc * l - CMatrix::identity(n, n)));
    out.view_mut((n, n), (n, n)).copy_from(&(&r * l));
    out
}

/// `Γ_Θ(λ) = −λτB⁻²R₀(λ)τ* − Θ/λ`.
pub fn gamma_theta(model: &MatrixModel, lambda: SpectralParam) -> CMatrix {
    let l = lambda.value();
    let tau = model.tau();
    -(tau * model.b_inv2() * model.r0(lambda) * tau.adjoint()) * c(l) - model.theta() * c(1.0 / l)
}

/// `Γ(λ) = −τB_C⁻²(λ − C)R(λ)τ* − Θ/λ`.
pub fn gamma_theta_generalized(model: &MatrixModel, lambda: SpectralParam) -> CMatrix {
    let l = lambda.value();
    let n = model.n();
    let tau = model.tau();
    let shift = CMatrix::identity(n, n) * c(l) - model.c_total();
    -(tau * model.bc_inv2() * shift * model.r_gen(lambda) * tau.adjoint()) - model.theta() * c(1.0 / l)
}

/// `(−A_Θ + λ²)⁻¹ = R₀ + G(Θ + λ²τB⁻²G)⁻¹Ğ` with `G = R₀τ*`, `Ğ = τR₀`.
pub fn a_theta_resolvent(model: &MatrixModel, lambda: SpectralParam) -> Result<CMatrix> {
    let l2 = lambda.value() * lambda.value();
    let r0 = model.r0(lambda);
    let g = &r0 * model.tau().adjoint();
    let gb = model.tau() * &r0;
    let gamma = model.theta() + model.tau() * model.b_inv2() * &g * c(l2);
    Ok(r0 + g * crate::linalg::guarded_inverse(&gamma)? * gb)
}

/// `A_Θ` read off the Krein resolvent: `λ² − R(λ)⁻¹`.
pub fn a_theta_from_resolvent(model: &MatrixModel, lambda: SpectralParam) -> Result<CMatrix> {
    let n = model.n();
    let r = a_theta_resolvent(model, lambda)?;
    Ok(CMatrix::identity(n, n) * c(lambda.value() * lambda.value()) - crate::linalg::guarded_inverse(&r)?)
}

/// λ-independent singular profile `G(λ) + λ²B⁻²G(λ)` with `G(λ) = R₀(λ)τ*`.
pub fn singular_profile(model: &MatrixModel, lambda: SpectralParam) -> CMatrix {
    let g = model.r0(lambda) * model.tau().adjoint();
    let l2 = lambda.value() * lambda.value();
    &g + model.b_inv2() * &g * c(l2)
}

/// λ-independent singular profile `G_C(λ) + λB_C⁻²(λ − C)G_C(λ)` with `G_C(λ) = R(λ)τ*`.
pub fn singular_profile_c(model: &MatrixModel, lambda: SpectralParam) -> CMatrix {
    let l = lambda.value();
    let n = model.n();
    let g = model.r_gen(lambda) * model.tau().adjoint();
    let shift = CMatrix::identity(n, n) * c(l) - model.c_total();
    &g + model.bc_inv2() * shift * &g * c(l)
}

fn relative_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = mat_max_abs(a).max(mat_max_abs(b));
    let d = mat_max_diff(a, b);
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}

/// Relative max-entry difference of the undrifted profile built at λ and at μ.
pub fn g_lambda_independence_residual(model: &MatrixModel, lambda: SpectralParam, mu: SpectralParam) -> Result<f64> {
    if lambda == mu {
        return Err(KreinError::EqualSpectralParams { lambda: lambda.value() });
    }
    Ok(relative_diff(&singular_profile(model, lambda), &singular_profile(model, mu)))
}

/// Relative max-entry difference of `G_C` built at λ and at μ.
pub fn gc_lambda_independence_residual(model: &MatrixModel, lambda: SpectralParam, mu: SpectralParam) -> Result<f64> {
    if lambda == mu {
        return Err(KreinError::EqualSpectralParams { lambda: lambda.value() });
    }
    Ok(relative_diff(&singular_profile_c(model, lambda), &singular_profile_c(model, mu)))
}

/// Decomposition `φ = φ₀ + B⁻²τ*ζ` with `Θζ = τφ₀`.
pub fn a_theta_decompose(model: &MatrixModel, phi: &CVector) -> (CVector, CVector) {
    let tau = model.tau();
    let k = inverse(&(model.theta() + tau * model.b_inv2() * tau.adjoint()));
    let zeta = k * (tau * phi);
    let phi0 = phi - model.b_inv2() * tau.adjoint() * &zeta;
    (phi0, zeta)
}

/// `Q_Θ(φ) = ‖Bφ₀‖² + ⟨Θζ, ζ⟩`.
pub fn quadratic_form(model: &MatrixModel, phi: &CVector) -> f64 {
    let (phi0, zeta) = a_theta_decompose(model, phi);
    let b_phi0: f64 = phi0.iter().zip(model.b()).map(|(p, b)| (p * b).norm_sqr()).sum();
    b_phi0 + zeta.dotc(&(model.theta() * &zeta)).re
}

/// `C̄*` as the adjoint of `C: (H̄₁, [·,·]₁) → H₀` where `[φ,ψ]₁ = ⟨Bφ, Bψ⟩`.
pub fn c_bar_adjoint(cm: &CMatrix, b2: &CMatrix) -> CMatrix {
    let n = cm.nrows();
    crate::linalg::gram_adjoint(cm, b2, &CMatrix::identity(n, n))
}
