//! Dense Krein families of the model.

use crate::krein::{Admissibility, KreinFamily, SpectralParam};
use crate::linalg::{c, CMatrix, CVector};
#[allow(unused_imports)]
use num_traits::Float;

use super::{free_wave_resolvent, gamma_theta, gamma_theta_generalized, generalized_resolvent, MatrixModel};

/// All four blocks at one λ, as matrices.
#[derive(Debug, Clone)]
pub struct DenseBlocks {
    pub free: CMatrix,
    pub g: CMatrix,
    pub g_breve: CMatrix,
    pub gamma: CMatrix,
}

impl DenseBlocks {
    /// `R₀ + GΓ⁻¹Ğ` as a matrix.
    pub fn resolvent(&self) -> crate::Result<CMatrix> {
        Ok(&self.free + &self.g * crate::linalg::guarded_inverse(&self.gamma)? * &self.g_breve)
    }
}

macro_rules! dense_family {
    ($ty:ty, $admiss:expr, $state:expr) => {
        impl KreinFamily for $ty {
            fn state_dim(&self) -> usize {
                ($state)(self)
            }
            fn aux_dim(&self) -> usize {
                self.0.m()
            }
            fn admissibility(&self) -> Admissibility {
                $admiss
            }
            fn free_resolvent(&self, lambda: SpectralParam, x: &CVector) -> CVector {
                self.blocks(lambda).free * x
            }
            fn g(&self, lambda: SpectralParam, zeta: &CVector) -> CVector {
                self.blocks(lambda).g * zeta
            }
            fn g_breve(&self, lambda: SpectralParam, x: &CVector) -> CVector {
                self.blocks(lambda).g_breve * x
            }
            fn gamma(&self, lambda: SpectralParam) -> CMatrix {
                self.blocks(lambda).gamma
            }
        }
    };
}

fn charge_column(model: &MatrixModel, phi: CMatrix, psi: CMatrix, lambda: f64) -> CMatrix {
    let (n, m) = (model.n(), model.m());
    let mut g = CMatrix::zeros(2 * n + m, m);
    g.view_mut((0, 0), (n, m)).copy_from(&phi);
    g.view_mut((n, 0), (n, m)).copy_from(&psi);
    g.view_mut((2 * n, 0), (m, m)).copy_from(&(CMatrix::identity(m, m) * c(-1.0 / lambda)));
    g
}

fn charge_row(model: &MatrixModel, phi: CMatrix, psi: CMatrix, lambda: f64) -> CMatrix {
    let (n, m) = (model.n(), model.m());
    let mut g = CMatrix::zeros(m, 2 * n + m);
    g.view_mut((0, 0), (m, n)).copy_from(&phi);
    g.view_mut((0, n), (m, n)).copy_from(&psi);
    g.view_mut((0, 2 * n), (m, m)).copy_from(&(model.theta() * c(-1.0 / lambda)));
    g
}

/// Wave-level family on `(φ, ψ, ζ)`: free part `W ⊕ 0`, `G(λ) = R₀(λ)τ*`.
#[derive(Debug, Clone, Copy)]
pub struct ThetaFamily<'a>(pub &'a MatrixModel);

impl ThetaFamily<'_> {
    pub fn blocks(&self, lambda: SpectralParam) -> DenseBlocks {
        let model = self.0;
        let l = lambda.value();
        let r0 = model.r0(lambda);
        let g = &r0 * model.tau().adjoint();
        let gb = model.tau() * &r0;
        let free = model.with_charge_block(
            &free_wave_resolvent(model, lambda),
            &(CMatrix::identity(model.m(), model.m()) * c(1.0 / l)),
        );
        DenseBlocks {
            free,
            g: charge_column(model, model.b_inv2() * &g * c(l), -g, l),
            g_breve: charge_row(model, &gb * c(l), gb, l),
            gamma: gamma_theta(model, lambda),
        }
    }
}

dense_family!(ThetaFamily<'_>, Admissibility::NonZero, |s: &ThetaFamily| 2 * s.0.n() + s.0.m());

/// Wave-level family of the drift model: free part `W_g ⊕ 0` with
/// `W_g(φ,ψ) = (ψ, Cψ − B_C²φ)`, `G(λ) = R(−λ)*τ* = R(λ)τ*`.
#[derive(Debug, Clone, Copy)]
pub struct GeneralizedThetaFamily<'a>(pub &'a MatrixModel);

impl GeneralizedThetaFamily<'_> {
    pub fn blocks(&self, lambda: SpectralParam) -> DenseBlocks {
        let model = self.0;
        let (n, m) = (model.n(), model.m());
        let l = lambda.value();
        let r = model.r_gen(lambda);
        let g = &r * model.tau().adjoint();
        let gb = model.tau() * &r;
        let shift = CMatrix::identity(n, n) * c(l) - model.c_total();
        let free =
            model.with_charge_block(&generalized_resolvent(model, lambda), &(CMatrix::identity(m, m) * c(1.0 / l)));
        DenseBlocks {
            free,
            g: charge_column(model, model.bc_inv2() * shift * &g, -g, l),
            g_breve: charge_row(model, &gb * c(l) - &gb * model.c_total(), gb, l),
            gamma: gamma_theta_generalized(model, lambda),
        }
    }
}

dense_family!(GeneralizedThetaFamily<'_>, Admissibility::NonZero, |s: &GeneralizedThetaFamily| 2 * s.0.n() + s.0.m());

/// Self-adjoint family of `A_Θ`, parametrised by `z = λ² > 0`:
/// `(−A_Θ + z)⁻¹ = R₀ + G(Θ + zτB⁻²G)⁻¹Ğ`.
#[derive(Debug, Clone, Copy)]
pub struct AThetaFamily<'a>(pub &'a MatrixModel);

impl AThetaFamily<'_> {
    pub fn blocks(&self, z: SpectralParam) -> DenseBlocks {
        let model = self.0;
        let lambda = SpectralParam::new(z.value().sqrt()).expect("z > 0");
        let r0 = model.r0(lambda);
        let g = &r0 * model.tau().adjoint();
        let gb = model.tau() * &r0;
        let gamma = model.theta() + model.tau() * model.b_inv2() * &g * c(z.value());
        DenseBlocks { free: r0, g, g_breve: gb, gamma }
    }
}

dense_family!(AThetaFamily<'_>, Admissibility::Positive, |s: &AThetaFamily| s.0.n());
