//! The full identity suite for one model.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::check::CheckOutcome;
use crate::error::Result;
use crate::krein::{
    gamma_difference_residual, resolvent_identity_residual, self_adjointness_residual, skew_adjointness_residual,
    standard_basis, GramMatrix, SpectralParam,
};
use crate::linalg::{c, hermitian_eigenvalues, inverse, kernel_basis, mat_max_abs, mat_max_diff, CMatrix, CVector};

use super::families::DenseBlocks;
use super::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub lambdas: Vec<f64>,
    pub tolerance: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { lambdas: alloc::vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0], tolerance: 1e-10 }
    }
}

fn rel(a: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        a / scale
    } else {
        a
    }
}

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    rel(mat_max_diff(a, b), mat_max_abs(a).max(mat_max_abs(b)))
}

fn matrix_family(f: impl Fn(SpectralParam) -> Result<CMatrix>) -> impl Fn(SpectralParam, &CVector) -> Result<CVector> {
    move |l, x| Ok(f(l)? * x)
}

/// `G(λ) + M⁻¹Ğ(−λ)ᴴ`, zero when `G(λ) = −Ğ(−λ)*` in the Gram `M`.
fn g_adjoint_residual(plus: &DenseBlocks, minus: &DenseBlocks, gram: &CMatrix) -> f64 {
    let adj = inverse(gram) * minus.g_breve.adjoint();
    rel(mat_max_abs(&(&plus.g + &adj)), mat_max_abs(&plus.g))
}

struct Collector {
    tol: f64,
    out: Vec<CheckOutcome>,
}

impl Collector {
    fn record(&mut self, name: &str, values: impl IntoIterator<Item = Result<f64>>) {
        let mut worst = 0.0f64;
        let mut failed: Option<String> = None;
        for v in values {
            match v {
                Ok(r) if r.is_nan() => failed = Some(String::from("NaN residual")),
                Ok(r) => worst = worst.max(r),
                Err(e) => failed = Some(format!("{e}")),
            }
        }
        match failed {
            Some(_) => self.out.push(CheckOutcome::failed(name, self.tol)),
            None => self.out.push(CheckOutcome::at_most(name, worst, self.tol)),
        }
    }
}

/// Runs every finite-dimensional identity on `model`. Residuals are relative
/// and maximised over the listed λ (and over all pairs λ ≠ μ).
pub fn run_identity_suite(model: &MatrixModel, cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    let mut col = Collector { tol: cfg.tolerance, out: Vec::new() };
    let lambdas: Vec<SpectralParam> = cfg.lambdas.iter().filter_map(|&l| SpectralParam::new(l).ok()).collect();
    let pairs: Vec<(SpectralParam, SpectralParam)> = lambdas
        .iter()
        .enumerate()
        .flat_map(|(i, &l)| lambdas[i + 1..].iter().map(move |&m| (l, m)))
        .filter(|(l, m)| l != m)
        .collect();
    let (n, m) = (model.n(), model.m());
    let dim = 2 * n + m;
    let pair_probes = standard_basis(2 * n);
    let probes = standard_basis(dim);
    let grams = [
        GramVariant::Plain,
        GramVariant::Theta,
        GramVariant::PlainBc,
        GramVariant::ThetaBc,
        GramVariant::CWeighted,
        GramVariant::CWeightedTheta,
    ]
    .map(|v| energy_gram(model, v));
    let gram = |i: usize| -> Result<&GramMatrix> { grams[i].as_ref().map_err(|e| e.clone()) };

    // free and generalized wave operators
    col.record(
        "free_resolvent_inverse",
        lambdas.iter().map(|&l| {
            let a = CMatrix::identity(2 * n, 2 * n) * c(l.value()) - model.free_generator();
            Ok(rel_diff(&(a * free_wave_resolvent(model, l)), &CMatrix::identity(2 * n, 2 * n)))
        }),
    );
    let free = matrix_family(|l| Ok(free_wave_resolvent(model, l)));
    col.record(
        "free_resolvent_skew",
        lambdas.iter().map(|&l| skew_adjointness_residual(&free, l, gram(0)?, &pair_probes)),
    );
    col.record(
        "generalized_resolvent_inverse",
        lambdas.iter().map(|&l| {
            let a = CMatrix::identity(2 * n, 2 * n) * c(l.value()) - model.generalized_generator();
            Ok(rel_diff(&(a * generalized_resolvent(model, l)), &CMatrix::identity(2 * n, 2 * n)))
        }),
    );
    let gen = matrix_family(|l| Ok(generalized_resolvent(model, l)));
    col.record(
        "generalized_resolvent_skew",
        lambdas.iter().map(|&l| skew_adjointness_residual(&gen, l, gram(2)?, &pair_probes)),
    );
    let flat = model.without_drift();
    col.record(
        "generalized_reduces_to_free",
        lambdas.iter().map(|&l| Ok(rel_diff(&generalized_resolvent(&flat, l), &free_wave_resolvent(&flat, l)))),
    );

    // section 3 extension
    let theta_fam = ThetaFamily(model);
    let theta_r = matrix_family(|l| perturbed_wave_resolvent(model, l));
    col.record(
        "theta_resolvent_identity",
        pairs.iter().map(|&(l, m)| resolvent_identity_residual(&theta_r, l, m, &probes)),
    );
    col.record(
        "theta_resolvent_skew",
        lambdas.iter().map(|&l| skew_adjointness_residual(&theta_r, l, gram(1)?, &probes)),
    );
    col.record(
        "theta_gamma_symmetry",
        lambdas.iter().map(|&l| {
            let g = gamma_theta(model, l);
            Ok(rel(mat_max_abs(&(g.adjoint() + gamma_theta(model, l.negated()))), mat_max_abs(&g)))
        }),
    );
    col.record("theta_gamma_difference", pairs.iter().map(|&(l, m)| gamma_difference_residual(&theta_fam, l, m)));
    col.record(
        "theta_g_adjoint",
        lambdas
            .iter()
            .map(|&l| Ok(g_adjoint_residual(&theta_fam.blocks(l), &theta_fam.blocks(l.negated()), &gram(1)?.0))),
    );
    col.record("theta_n_agreement", lambdas.iter().map(|&l| n_theta_agreement_residual(model, l)));
    col.record(
        "theta_compression_oracle",
        lambdas
            .iter()
            .map(|&l| Ok(rel_diff(&perturbed_wave_resolvent(model, l)?, &theta_compression_oracle(model, l)?))),
    );
    col.record("theta_action_consistency", pairs.iter().map(|&(l, m)| theta_action_consistency_residual(model, l, m)));
    col.record("theta_action_reduction", lambdas.iter().map(|&l| Ok(theta_action_reduction_residual(model, l))));
    col.record("g_lambda_independence", pairs.iter().map(|&(l, m)| g_lambda_independence_residual(model, l, m)));

    // A_Θ
    let a_dom = {
        let tau = model.tau();
        let k = inverse(&(model.theta() + tau * model.b_inv2() * tau.adjoint()));
        -model.b2() + tau.adjoint() * k * tau
    };
    let positive: Vec<SpectralParam> = lambdas.iter().copied().filter(|l| l.value() > 0.0).collect();
    col.record(
        "a_theta_resolvent_vs_domain",
        lambdas.iter().map(|&l| {
            let shifted = CMatrix::identity(n, n) * c(l.value() * l.value()) - &a_dom;
            Ok(rel_diff(&a_theta_resolvent(model, l)?, &inverse(&shifted)))
        }),
    );
    col.record(
        "a_theta_self_adjoint",
        lambdas.iter().map(|&l| {
            let a = a_theta_from_resolvent(model, l)?;
            Ok(rel(mat_max_abs(&(&a - a.adjoint())), mat_max_abs(&a)))
        }),
    );
    col.record(
        "a_theta_negative_injective",
        lambdas.iter().map(|&l| {
            let a = a_theta_from_resolvent(model, l)?;
            let top = *hermitian_eigenvalues(&a).last().unwrap();
            Ok(if top < 0.0 { 0.0 } else { 1.0 + top })
        }),
    );
    let ker = kernel_basis(model.tau(), 1e-12);
    col.record(
        "a_theta_ker_tau_agreement",
        lambdas.iter().map(|&l| {
            let a = a_theta_from_resolvent(model, l)?;
            Ok(rel(mat_max_abs(&(&a * &ker + model.b2() * &ker)), mat_max_abs(&(model.b2() * &ker)).max(1e-300)))
        }),
    );
    col.record(
        "q_theta_identity",
        positive.iter().map(|&l| {
            let r = a_theta_resolvent(model, l)?;
            let a = a_theta_from_resolvent(model, l)?;
            let mut worst = 0.0f64;
            for e in standard_basis(n) {
                let phi = &r * e;
                let lhs = -phi.dotc(&(&a * &phi)).re;
                let q = quadratic_form(model, &phi);
                worst = worst.max(rel((lhs - q).abs(), q.abs()));
            }
            Ok(worst)
        }),
    );
    let a_fam = AThetaFamily(model);
    let a_r = matrix_family(|z| a_fam.blocks(z).resolvent());
    let zs: Vec<SpectralParam> = positive.iter().map(|l| SpectralParam::new(l.value() * l.value()).unwrap()).collect();
    let zpairs: Vec<(SpectralParam, SpectralParam)> =
        zs.iter().enumerate().flat_map(|(i, &a)| zs[i + 1..].iter().map(move |&b| (a, b))).collect();
    col.record(
        "a_theta_resolvent_identity",
        zpairs.iter().map(|&(a, b)| resolvent_identity_residual(&a_r, a, b, &standard_basis(n))),
    );
    col.record(
        "a_theta_resolvent_symmetric",
        zs.iter().map(|&z| self_adjointness_residual(&a_r, z, &crate::krein::Euclidean, &standard_basis(n))),
    );
    col.record("a_theta_gamma_difference", zpairs.iter().map(|&(a, b)| gamma_difference_residual(&a_fam, a, b)));

    // drift model, W_g picture
    let gen_fam = GeneralizedThetaFamily(model);
    let gen_r = matrix_family(|l| generalized_extension_resolvent(model, l));
    col.record(
        "gen_gamma_symmetry",
        lambdas.iter().map(|&l| {
            let g = gamma_theta_generalized(model, l);
            Ok(rel(mat_max_abs(&(g.adjoint() + gamma_theta_generalized(model, l.negated()))), mat_max_abs(&g)))
        }),
    );
    col.record("gen_gamma_difference", pairs.iter().map(|&(l, m)| gamma_difference_residual(&gen_fam, l, m)));
    col.record(
        "gen_g_adjoint",
        lambdas.iter().map(|&l| Ok(g_adjoint_residual(&gen_fam.blocks(l), &gen_fam.blocks(l.negated()), &gram(3)?.0))),
    );
    col.record(
        "gen_resolvent_identity",
        pairs.iter().map(|&(l, m)| resolvent_identity_residual(&gen_r, l, m, &probes)),
    );
    col.record("gen_resolvent_skew", lambdas.iter().map(|&l| skew_adjointness_residual(&gen_r, l, gram(3)?, &probes)));
    col.record(
        "gen_compression_oracle",
        lambdas.iter().map(|&l| {
            Ok(rel_diff(&generalized_extension_resolvent(model, l)?, &generalized_compression_oracle(model, l)?))
        }),
    );
    col.record(
        "gen_reduces_to_theta",
        lambdas.iter().map(|&l| {
            Ok(rel_diff(&generalized_extension_resolvent(&flat, l)?, &perturbed_wave_resolvent(&flat, l)?)
                .max(rel_diff(&gamma_theta_generalized(&flat, l), &gamma_theta(&flat, l))))
        }),
    );
    col.record("gc_lambda_independence", pairs.iter().map(|&(l, m)| gc_lambda_independence_residual(model, l, m)));

    let c_bar = || {
        let bc = model.bc();
        let bc_inv = inverse(&bc);
        let b = model.b_matrix();
        let b_inv = inverse(&b);
        let mut worst = 0.0f64;
        for cm in [model.c_total(), model.c1().clone(), model.c2().clone()] {
            if mat_max_abs(&cm) == 0.0 {
                continue;
            }
            let scale = mat_max_abs(&cm);
            worst = worst.max(rel(mat_max_diff(&c_bar_adjoint(&cm, &model.bc2()), &-(&bc_inv * &cm * &bc_inv)), scale));
            worst = worst.max(rel(mat_max_diff(&c_bar_adjoint(&cm, &model.b2()), &-(&b_inv * &cm * &b_inv)), scale));
        }
        Ok(worst)
    };
    col.record("c_bar_adjoint", [c_bar()]);

    // drift model, split picture
    let split_r = matrix_family(|l| c_split_extension_resolvent(model, l));
    col.record("split_action_lambda_free", lambdas.iter().map(|&l| tilde_w_theta_action_residual(model, l)));
    col.record("split_action_consistency", pairs.iter().map(|&(l, m)| split_action_consistency_residual(model, l, m)));
    col.record(
        "split_resolvent_skew",
        lambdas.iter().map(|&l| skew_adjointness_residual(&split_r, l, gram(5)?, &probes)),
    );
    col.record(
        "split_compression_oracle",
        lambdas
            .iter()
            .map(|&l| Ok(rel_diff(&c_split_extension_resolvent(model, l)?, &c_split_compression_oracle(model, l)?))),
    );
    col.record(
        "s_conjugation",
        [(|| {
            let s = model.s_map();
            let unitary = rel_diff(&(s.adjoint() * &gram(4)?.0 * &s), &gram(2)?.0);
            let conj = rel_diff(&(&s * model.generalized_generator() * inverse(&s)), &model.c_split_generator());
            Ok(unitary.max(conj))
        })()],
    );
    col.record(
        "c_weighted_cross_terms",
        [(|| {
            let (c1, c2) = (model.c1(), model.c2());
            let mut cross = CMatrix::zeros(2 * n, 2 * n);
            cross.view_mut((0, 0), (n, n)).copy_from(&((c2 - c1).adjoint() * c2));
            cross.view_mut((0, n), (n, n)).copy_from(&c2.adjoint());
            cross.view_mut((n, 0), (n, n)).copy_from(c2);
            Ok(rel_diff(&(&gram(4)?.0 - &gram(0)?.0), &cross))
        })()],
    );

    col.out
}
