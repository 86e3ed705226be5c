//! Extension resolvents, their domain description and the compression oracle.

use alloc::vec::Vec;

use crate::error::Result;
use crate::krein::SpectralParam;
use crate::linalg::{c, hermitian_sqrt, inverse, kernel_basis, mat_max_abs, vec_max_abs, CMatrix, CVector};

use super::families::{GeneralizedThetaFamily, ThetaFamily};
use super::random::{random_cvector, rng};
use super::{energy_gram, singular_profile_c, GramVariant, MatrixModel};

/// `(−W̃_Θ + λ)⁻¹` on `(φ, ψ, ζ)`, assembled from the Krein formula.
pub fn perturbed_wave_resolvent(model: &MatrixModel, lambda: SpectralParam) -> Result<CMatrix> {
    ThetaFamily(model).blocks(lambda).resolvent()
}

/// Extension resolvent of the drift model in the `W_g` picture.
pub fn generalized_extension_resolvent(model: &MatrixModel, lambda: SpectralParam) -> Result<CMatrix> {
    GeneralizedThetaFamily(model).blocks(lambda).resolvent()
}

fn s_hat(model: &MatrixModel) -> CMatrix {
    model.with_charge_block(&model.s_map(), &CMatrix::identity(model.m(), model.m()))
}

fn s_hat_inv(model: &MatrixModel) -> CMatrix {
    let n = model.n();
    let mut s = CMatrix::identity(2 * n, 2 * n);
    s.view_mut((n, 0), (n, n)).copy_from(model.c2());
    model.with_charge_block(&s, &CMatrix::identity(model.m(), model.m()))
}

/// Extension resolvent in the split picture `(C₂φ + ψ, C₁ψ − B²φ)`, obtained
/// by conjugating with `S(φ,ψ,ζ) = (φ, ψ − C₂φ, ζ)`.
pub fn c_split_extension_resolvent(model: &MatrixModel, lambda: SpectralParam) -> Result<CMatrix> {
    Ok(s_hat(model) * generalized_extension_resolvent(model, lambda)? * s_hat_inv(model))
}

/// Constraint matrix `[τ, 0, −Θ]` whose kernel is `N_Θ`.
pub fn n_theta_constraint(model: &MatrixModel) -> CMatrix {
    let (n, m) = (model.n(), model.m());
    let mut a = CMatrix::zeros(m, 2 * n + m);
    a.view_mut((0, 0), (m, n)).copy_from(model.tau());
    a.view_mut((0, 2 * n), (m, m)).copy_from(&(-model.theta()));
    a
}

/// Basis of `N_Θ`, orthonormal for `gram`.
pub fn n_theta_basis(model: &MatrixModel, gram: &CMatrix) -> CMatrix {
    let k = kernel_basis(&n_theta_constraint(model), 1e-12);
    let inner = k.adjoint() * gram * &k;
    let root = hermitian_sqrt(&inner).expect("Gram restricted to a subspace stays positive");
    k * inverse(&root)
}

/// Independent route to the extension resolvent: compress the unperturbed
/// generator `w` onto `N_Θ` and invert there,
/// `V(λ − VᴴMwV)⁻¹VᴴM`.
pub fn compression_resolvent(model: &MatrixModel, w: &CMatrix, gram: &CMatrix, lambda: SpectralParam) -> CMatrix {
    let v = n_theta_basis(model, gram);
    let k = v.ncols();
    let vm = v.adjoint() * gram;
    let wc = &vm * w * &v;
    &v * inverse(&(CMatrix::identity(k, k) * c(lambda.value()) - wc)) * vm
}

pub fn theta_compression_oracle(model: &MatrixModel, lambda: SpectralParam) -> Result<CMatrix> {
    let gram = energy_gram(model, GramVariant::Theta)?;
    let w = model.with_charge_block(&model.free_generator(), &CMatrix::zeros(model.m(), model.m()));
    Ok(compression_resolvent(model, &w, &gram.0, lambda))
}

pub fn generalized_compression_oracle(model: &MatrixModel, lambda: SpectralParam) -> Result<CMatrix> {
    let gram = energy_gram(model, GramVariant::ThetaBc)?;
    let w = model.with_charge_block(&model.generalized_generator(), &CMatrix::zeros(model.m(), model.m()));
    Ok(compression_resolvent(model, &w, &gram.0, lambda))
}

pub fn c_split_compression_oracle(model: &MatrixModel, lambda: SpectralParam) -> Result<CMatrix> {
    let gram = energy_gram(model, GramVariant::CWeightedTheta)?;
    let w = model.with_charge_block(&model.c_split_generator(), &CMatrix::zeros(model.m(), model.m()));
    Ok(compression_resolvent(model, &w, &gram.0, lambda))
}

fn stack(parts: &[&CVector]) -> CVector {
    let len = parts.iter().map(|p| p.len()).sum();
    let mut out = CVector::zeros(len);
    let mut off = 0;
    for p in parts {
        out.rows_mut(off, p.len()).copy_from(p);
        off += p.len();
    }
    out
}

fn charge_of(model: &MatrixModel, phi0: &CVector) -> CVector {
    inverse(model.theta()) * (model.tau() * phi0)
}

/// Domain element of the undrifted Θ extension: `φ₀` free, `ψ = ψ_λ + G(λ)ζ_ψ`,
/// `Θζ_φ = τφ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaDecomposition {
    pub phi0: CVector,
    pub psi_lambda: CVector,
    pub zeta_psi: CVector,
}

impl ThetaDecomposition {
    pub fn vector(&self, model: &MatrixModel, lambda: SpectralParam) -> CVector {
        let g = model.r0(lambda) * model.tau().adjoint();
        let psi = &self.psi_lambda + g * &self.zeta_psi;
        stack(&[&self.phi0, &psi, &charge_of(model, &self.phi0)])
    }

    /// `(ψ_λ − λ²B⁻²G(λ)ζ_ψ, −B²φ₀, ζ_ψ)`.
    pub fn action(&self, model: &MatrixModel, lambda: SpectralParam) -> CVector {
        let l2 = lambda.value() * lambda.value();
        let g = model.r0(lambda) * model.tau().adjoint();
        let psi0 = &self.psi_lambda - model.b_inv2() * g * &self.zeta_psi * c(l2);
        stack(&[&psi0, &(-(model.b2() * &self.phi0)), &self.zeta_psi])
    }
}

/// Domain element of the split-drift extension:
/// `φ₀ = φ_λ + B_C⁻²C G_C(λ)ζ_ψ`, `ψ₀ = ψ_λ + (1 − C₂B_C⁻²C)G_C(λ)ζ_ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDecomposition {
    pub phi_lambda: CVector,
    pub psi_lambda: CVector,
    pub zeta_psi: CVector,
}

impl SplitDecomposition {
    fn pieces(model: &MatrixModel, lambda: SpectralParam, zeta: &CVector) -> (CVector, CVector) {
        let gz = model.r_gen(lambda) * model.tau().adjoint() * zeta;
        let bcc = model.bc_inv2() * model.c_total();
        let dphi = &bcc * &gz;
        let dpsi = &gz - model.c2() * &dphi;
        (dphi, dpsi)
    }

    pub fn vector(&self, model: &MatrixModel, lambda: SpectralParam) -> CVector {
        let (dphi, dpsi) = Self::pieces(model, lambda, &self.zeta_psi);
        let phi0 = &self.phi_lambda + dphi;
        let psi0 = &self.psi_lambda + dpsi;
        let zeta = charge_of(model, &phi0);
        stack(&[&phi0, &psi0, &zeta])
    }

    /// Same domain vector decomposed at another λ.
    pub fn redecompose(model: &MatrixModel, x: &CVector, zeta_psi: &CVector, lambda: SpectralParam) -> Self {
        let n = model.n();
        let (dphi, dpsi) = Self::pieces(model, lambda, zeta_psi);
        SplitDecomposition {
            phi_lambda: x.rows(0, n) - dphi,
            psi_lambda: x.rows(n, n) - dpsi,
            zeta_psi: zeta_psi.clone(),
        }
    }

    /// λ-dependent action of the split-drift extension.
    pub fn action(&self, model: &MatrixModel, lambda: SpectralParam) -> CVector {
        let l = lambda.value();
        let n = model.n();
        let gz = model.r_gen(lambda) * model.tau().adjoint() * &self.zeta_psi;
        let shift = CMatrix::identity(n, n) * c(l) - model.c_total();
        let corr = model.bc_inv2() * shift * gz * c(l);
        let first = model.c2() * &self.phi_lambda + &self.psi_lambda - &corr;
        let second = model.c1() * &self.psi_lambda - model.b2() * &self.phi_lambda + model.c2() * &corr;
        stack(&[&first, &second, &self.zeta_psi])
    }
}

/// λ-free action `(C₂φ₀ + ψ₀ − G_Cζ_ψ, C₁ψ₀ − B²φ₀ + C₂G_Cζ_ψ, ζ_ψ)`.
pub fn lambda_free_action(model: &MatrixModel, x: &CVector, zeta_psi: &CVector) -> CVector {
    let n = model.n();
    let phi0 = x.rows(0, n).into_owned();
    let psi0 = x.rows(n, n).into_owned();
    // any λ gives the same profile
    let gc = singular_profile_c(model, SpectralParam::new(1.0).unwrap()) * zeta_psi;
    let first = model.c2() * &phi0 + &psi0 - &gc;
    let second = model.c1() * &psi0 - model.b2() * &phi0 + model.c2() * &gc;
    stack(&[&first, &second, zeta_psi])
}

const PROBE_SEED: u64 = 0x6b72_6569_6e00;
const PROBES: usize = 4;

fn relative(res: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        res / scale
    } else {
        res
    }
}

pub fn split_probes(model: &MatrixModel) -> Vec<SplitDecomposition> {
    let mut r = rng(PROBE_SEED ^ (model.n() as u64) << 8 ^ model.m() as u64);
    (0..PROBES)
        .map(|_| SplitDecomposition {
            phi_lambda: random_cvector(&mut r, model.n()),
            psi_lambda: random_cvector(&mut r, model.n()),
            zeta_psi: random_cvector(&mut r, model.m()),
        })
        .collect()
}

pub fn theta_probes(model: &MatrixModel) -> Vec<ThetaDecomposition> {
    split_probes(model)
        .into_iter()
        .map(|p| ThetaDecomposition { phi0: p.phi_lambda, psi_lambda: p.psi_lambda, zeta_psi: p.zeta_psi })
        .collect()
}

/// Difference between the λ-dependent action, the λ-free action and the
/// action after re-decomposing at `λ' = 1.7λ`, relative to the action size.
pub fn tilde_w_theta_action_residual(model: &MatrixModel, lambda: SpectralParam) -> Result<f64> {
    let other = SpectralParam::new(1.7 * lambda.value())?;
    let mut worst = 0.0f64;
    for d in split_probes(model) {
        let x = d.vector(model, lambda);
        let a = d.action(model, lambda);
        let b = lambda_free_action(model, &x, &d.zeta_psi);
        let a2 = SplitDecomposition::redecompose(model, &x, &d.zeta_psi, other).action(model, other);
        let scale = vec_max_abs(&a).max(vec_max_abs(&x));
        worst = worst.max(relative(vec_max_abs(&(&a - &b)).max(vec_max_abs(&(&a - &a2))), scale));
    }
    Ok(worst)
}

/// Residual of the C = 0 split action against the undrifted action `(ψ₀, −B²φ₀, ζ_ψ)`.
pub fn theta_action_reduction_residual(model: &MatrixModel, lambda: SpectralParam) -> f64 {
    let flat = model.without_drift();
    let mut worst = 0.0f64;
    for d in theta_probes(&flat) {
        let split = SplitDecomposition {
            phi_lambda: d.phi0.clone(),
            psi_lambda: d.psi_lambda.clone(),
            zeta_psi: d.zeta_psi.clone(),
        };
        let a = split.action(&flat, lambda);
        let b = d.action(&flat, lambda);
        worst = worst.max(relative(vec_max_abs(&(&a - &b)), vec_max_abs(&b)));
    }
    worst
}

/// `R̂(μ)(μx − W̃_Θx) = x` on domain elements of the undrifted Θ extension.
pub fn theta_action_consistency_residual(model: &MatrixModel, lambda: SpectralParam, mu: SpectralParam) -> Result<f64> {
    let r = perturbed_wave_resolvent(model, mu)?;
    let mut worst = 0.0f64;
    for d in theta_probes(model) {
        let x = d.vector(model, lambda);
        let y = &x * c(mu.value()) - d.action(model, lambda);
        worst = worst.max(relative(vec_max_abs(&(r.clone() * y - &x)), vec_max_abs(&x)));
    }
    Ok(worst)
}

/// `R̂(μ)(μx − W̃_Θx) = x` on domain elements of the split-drift extension.
pub fn split_action_consistency_residual(model: &MatrixModel, lambda: SpectralParam, mu: SpectralParam) -> Result<f64> {
    let r = c_split_extension_resolvent(model, mu)?;
    let mut worst = 0.0f64;
    for d in split_probes(model) {
        let x = d.vector(model, lambda);
        let y = &x * c(mu.value()) - d.action(model, lambda);
        worst = worst.max(relative(vec_max_abs(&(r.clone() * y - &x)), vec_max_abs(&x)));
    }
    Ok(worst)
}

/// `R̂(λ)(−W̃ + λ)x = x` for `x ∈ N_Θ` (with `ψ` unconstrained).
pub fn n_theta_agreement_residual(model: &MatrixModel, lambda: SpectralParam) -> Result<f64> {
    let gram = energy_gram(model, GramVariant::Theta)?;
    let v = n_theta_basis(model, &gram.0);
    let dim = 2 * model.n() + model.m();
    let w = model.with_charge_block(&model.free_generator(), &CMatrix::zeros(model.m(), model.m()));
    let shifted = CMatrix::identity(dim, dim) * c(lambda.value()) - w;
    let r = perturbed_wave_resolvent(model, lambda)?;
    let back = r * shifted * &v;
    Ok(relative(mat_max_abs(&(&back - &v)), mat_max_abs(&v)))
}
