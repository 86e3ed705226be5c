use kreinwave_core::krein::{
    assemble_resolvent, cayley_step, resolvent_identity_residual, skew_adjointness_residual, standard_basis, Euclidean,
    InnerProduct, KreinFamily, Perturbed, SpectralParam,
};
use kreinwave_core::linalg::{c, hermitian_eigenvalues, mat_max_abs, mat_max_diff, vec_max_abs, CMatrix, CVector};
use kreinwave_core::matrix_model::*;
use proptest::prelude::*;

fn lam(x: f64) -> SpectralParam {
    SpectralParam::new(x).unwrap()
}

fn model_for(seed: u64) -> MatrixModel {
    let n = 1 + (seed % 8) as usize;
    let m = 1 + (seed % 3) as usize;
    MatrixModel::random(seed, n, m.min(n), seed % 4 != 3).unwrap()
}

#[test]
fn fifty_seeded_models_pass_every_identity() {
    let cfg = SuiteConfig::default();
    for seed in 0..50 {
        let model = model_for(seed);
        let outcomes = run_identity_suite(&model, &cfg);
        assert!(outcomes.len() >= 12);
        for o in outcomes {
            assert!(o.passed, "seed {seed}: {} residual {:e}", o.name, o.residual);
        }
    }
}

#[test]
fn assembled_resolvent_satisfies_identity() {
    let model = MatrixModel::random(7, 4, 1, false).unwrap();
    let fam = ThetaFamily(&model);
    let r = Perturbed(&fam);
    let probes = standard_basis(fam.state_dim());
    assert!(resolvent_identity_residual(&r, lam(1.0), lam(2.0), &probes).unwrap() <= 1e-10);
    assert!(resolvent_identity_residual(&r, lam(1.0), lam(3.0), &probes).unwrap() <= 1e-10);
    // agrees with the dense assembly
    let dense = perturbed_wave_resolvent(&model, lam(1.0)).unwrap();
    let assembled = assemble_resolvent(&fam, lam(1.0)).unwrap();
    for e in &probes {
        let diff = vec_max_abs(&(&dense * e - assembled.apply(e)));
        assert!(diff <= 1e-12 * mat_max_abs(&dense));
    }
}

#[test]
fn weighted_gram_is_needed_for_skewness() {
    let model = MatrixModel::random(11, 5, 2, false).unwrap();
    let r = |l: SpectralParam, x: &CVector| perturbed_wave_resolvent(&model, l).map(|m| m * x);
    let probes = standard_basis(2 * 5 + 2);
    let weighted = energy_gram(&model, GramVariant::Theta).unwrap();
    assert!(skew_adjointness_residual(&r, lam(1.0), &weighted, &probes).unwrap() <= 1e-10);
    assert!(skew_adjointness_residual(&r, lam(1.0), &Euclidean, &probes).unwrap() > 1e-3);
}

#[test]
fn extension_inverts_on_n_theta() {
    for seed in 0..10 {
        let model = model_for(seed);
        for l in [0.5, 1.0, -2.0] {
            assert!(n_theta_agreement_residual(&model, lam(l)).unwrap() <= 1e-11);
        }
    }
}

#[test]
fn huge_theta_suppresses_correction_on_uncharged_inputs() {
    let base = MatrixModel::random(3, 4, 2, false).unwrap();
    let model = base.with_theta(CMatrix::identity(2, 2) * c(1e6)).unwrap();
    let (n, m) = (4, 2);
    let l = lam(1.0);
    let r = perturbed_wave_resolvent(&model, l).unwrap();
    let free = free_wave_resolvent(&model, l);
    let mut expected = CMatrix::zeros(2 * n + m, 2 * n + m);
    expected.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&free);
    for i in 0..m {
        expected[(2 * n + i, 2 * n + i)] = c(1.0 / l.value());
    }
    // only the ζ = 0 columns: a charged input keeps an O(1) correction
    let cols = 2 * n;
    let dev = mat_max_diff(&r.columns(0, cols).into_owned(), &expected.columns(0, cols).into_owned());
    assert!(dev < 1e-5, "deviation {dev:e}");
    assert!(dev > 1e-9);
    let a = a_theta_resolvent(&model, l).unwrap();
    assert!(mat_max_diff(&a, &model.r0(l)) < 1e-5);
}

#[test]
fn a_theta_is_negative_for_fifty_models() {
    for seed in 0..50 {
        let model = model_for(seed);
        let a = a_theta_from_resolvent(&model, lam(1.0)).unwrap();
        let eig = hermitian_eigenvalues(&a);
        assert!(*eig.last().unwrap() < 0.0, "seed {seed}");
        assert!(eig.iter().all(|e| e.abs() > 0.0));
    }
}

#[test]
fn drift_free_generalized_objects_reduce() {
    let model = MatrixModel::random(5, 3, 1, true).unwrap().without_drift();
    for l in [0.5, -1.0, 2.0] {
        let l = lam(l);
        assert!(mat_max_diff(&generalized_resolvent(&model, l), &free_wave_resolvent(&model, l)) <= 1e-14);
        assert!(mat_max_diff(&gamma_theta_generalized(&model, l), &gamma_theta(&model, l)) <= 1e-13);
        assert!(theta_action_reduction_residual(&model, l) <= 1e-12);
    }
}

#[test]
fn gc_is_lambda_independent_for_drift_models() {
    let model = MatrixModel::random(9, 6, 2, true).unwrap();
    assert!(mat_max_abs(model.c1()) > 0.0);
    assert!(gc_lambda_independence_residual(&model, lam(1.0), lam(2.0)).unwrap() <= 1e-11);
    assert!(g_lambda_independence_residual(&model, lam(1.0), lam(2.0)).unwrap() <= 1e-11);
    for l in [1.0, 2.0] {
        assert!(tilde_w_theta_action_residual(&model, lam(l)).unwrap() <= 1e-10);
    }
}

#[test]
fn s_map_conjugates_generators() {
    let model = MatrixModel::random(21, 5, 2, true).unwrap();
    let s = model.s_map();
    let plain = energy_gram(&model, GramVariant::PlainBc).unwrap();
    let cw = energy_gram(&model, GramVariant::CWeighted).unwrap();
    let scale = mat_max_abs(&plain.0);
    assert!(mat_max_diff(&(s.adjoint() * &cw.0 * &s), &plain.0) <= 1e-12 * scale);
    let s_inv = s.clone().try_inverse().unwrap();
    let conj = &s * model.generalized_generator() * s_inv;
    assert!(mat_max_diff(&conj, &model.c_split_generator()) <= 1e-12 * mat_max_abs(&conj));
}

#[test]
fn cayley_conserves_theta_energy_over_1000_steps() {
    let model = MatrixModel::random(13, 5, 2, true).unwrap();
    let dt = 0.05;
    let gram = energy_gram(&model, GramVariant::Theta).unwrap();
    let flat = model.without_drift();
    let r_mat = perturbed_wave_resolvent(&flat, lam(2.0 / dt)).unwrap();
    let r = |_: SpectralParam, x: &CVector| Ok(&r_mat * x);
    let mut x = CVector::from_fn(12, |i, _| c((i as f64 * 0.7).sin()));
    let e0 = gram.norm(&x);
    for _ in 0..1000 {
        x = cayley_step(&r, dt, &x).unwrap();
    }
    assert!((gram.norm(&x) - e0).abs() <= 1e-12 * e0);
}

// `slope` multiplies λ: a constant shift alone keeps Γ(λ) − Γ(μ) intact
struct Corrupted<'a> {
    inner: ThetaFamily<'a>,
    eps: f64,
    slope: bool,
}

impl KreinFamily for Corrupted<'_> {
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }
    fn aux_dim(&self) -> usize {
        self.inner.aux_dim()
    }
    fn free_resolvent(&self, l: SpectralParam, x: &CVector) -> CVector {
        self.inner.free_resolvent(l, x)
    }
    fn g(&self, l: SpectralParam, z: &CVector) -> CVector {
        self.inner.g(l, z)
    }
    fn g_breve(&self, l: SpectralParam, x: &CVector) -> CVector {
        self.inner.g_breve(l, x)
    }
    fn gamma(&self, l: SpectralParam) -> CMatrix {
        let g = self.inner.gamma(l);
        let k = g.nrows();
        let shift = if self.slope { self.eps * l.value() } else { self.eps };
        g + CMatrix::identity(k, k) * c(shift)
    }
}

#[test]
fn corrupted_gamma_breaks_identity_linearly() {
    let model = MatrixModel::random(17, 4, 2, false).unwrap();
    let probes = standard_basis(10);
    let gram = energy_gram(&model, GramVariant::Theta).unwrap();
    let sweep = |slope: bool| -> Vec<f64> {
        [1e-6, 1e-4, 1e-2]
            .iter()
            .map(|&eps| {
                let fam = Corrupted { inner: ThetaFamily(&model), eps, slope };
                if slope {
                    resolvent_identity_residual(&Perturbed(&fam), lam(1.0), lam(2.0), &probes).unwrap()
                } else {
                    skew_adjointness_residual(&Perturbed(&fam), lam(1.0), &gram, &probes).unwrap()
                }
            })
            .collect()
    };
    for res in [sweep(true), sweep(false)] {
        assert!(res[0] > 1e-9, "{res:?}");
        for w in res.windows(2) {
            let ratio = w[1] / w[0];
            assert!((50.0..200.0).contains(&ratio), "ratio {ratio}");
        }
    }
    // the constant shift alone is invisible to the resolvent identity
    let fam = Corrupted { inner: ThetaFamily(&model), eps: 1e-2, slope: false };
    assert!(resolvent_identity_residual(&Perturbed(&fam), lam(1.0), lam(2.0), &probes).unwrap() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_models_satisfy_identities(seed in 0u64..1_000_000, n in 1usize..=8, m in 1usize..=3, drift: bool) {
        let model = MatrixModel::random(seed, n, m.min(n), drift).unwrap();
        for o in run_identity_suite(&model, &SuiteConfig::default()) {
            prop_assert!(o.passed, "{} residual {:e}", o.name, o.residual);
        }
    }

    #[test]
    fn gamma_is_skew_under_reflection(seed in 0u64..1_000_000, l in 0.1f64..5.0) {
        let model = MatrixModel::random(seed, 4, 2, true).unwrap();
        let l = lam(l);
        for g in [gamma_theta, gamma_theta_generalized] {
            let a = g(&model, l);
            prop_assert!(mat_max_abs(&(a.adjoint() + g(&model, l.negated()))) <= 1e-12 * mat_max_abs(&a));
        }
    }

    #[test]
    fn quadratic_form_is_nonnegative(seed in 0u64..1_000_000, re in proptest::collection::vec(-1.0f64..1.0, 5)) {
        let model = MatrixModel::random(seed, 5, 2, false).unwrap();
        let phi = CVector::from_iterator(5, re.iter().map(|&x| c(x)));
        prop_assert!(quadratic_form(&model, &phi) >= 0.0);
    }
}
