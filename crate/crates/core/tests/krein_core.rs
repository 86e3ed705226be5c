use kreinwave_core::krein::*;
use kreinwave_core::linalg::{c, inverse, mat_max_abs, vec_max_abs, CMatrix, CVector};
use kreinwave_core::KreinError;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lam(x: f64) -> SpectralParam {
    SpectralParam::new(x).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn skew_hermitian(a: &CMatrix) -> CMatrix {
    (a - a.adjoint()) * c(0.5)
}

/// `M = I + XᴴX`.
fn gram(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let x = random_matrix(rng, n, n);
    CMatrix::identity(n, n) + x.adjoint() * x
}

/// Rank-m perturbation `A + BC` of a generator `A`, written as a Krein family:
/// `G = R₀B`, `Ğ = CR₀`, `Γ = I − CR₀B`. With `A = M⁻¹S₁` and `C = S₂BᴴM`
/// for skew-Hermitian `S₁`, `S₂` both `A` and `A + BC` are skew in `⟨·,·⟩_M`.
struct Woodbury {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    m: CMatrix,
}

impl Woodbury {
    fn random(seed: u64, n: usize, m: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gm = gram(&mut rng, n);
        let s1 = skew_hermitian(&random_matrix(&mut rng, n, n));
        let s2 = skew_hermitian(&random_matrix(&mut rng, m, m));
        let b = random_matrix(&mut rng, n, m);
        let a = inverse(&gm) * s1;
        let cm = s2 * b.adjoint() * &gm;
        Woodbury { a, b, c: cm, m: gm }
    }

    fn r0(&self, l: SpectralParam) -> CMatrix {
        let n = self.a.nrows();
        inverse(&(CMatrix::identity(n, n) * c(l.value()) - &self.a))
    }

    fn direct(&self, l: SpectralParam) -> CMatrix {
        let n = self.a.nrows();
        inverse(&(CMatrix::identity(n, n) * c(l.value()) - &self.a - &self.b * &self.c))
    }
}

impl KreinFamily for Woodbury {
    fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    fn aux_dim(&self) -> usize {
        self.b.ncols()
    }
    fn free_resolvent(&self, l: SpectralParam, x: &CVector) -> CVector {
        self.r0(l) * x
    }
    fn g(&self, l: SpectralParam, z: &CVector) -> CVector {
        self.r0(l) * (&self.b * z)
    }
    fn g_breve(&self, l: SpectralParam, x: &CVector) -> CVector {
        &self.c * (self.r0(l) * x)
    }
    fn gamma(&self, l: SpectralParam) -> CMatrix {
        let m = self.b.ncols();
        CMatrix::identity(m, m) - &self.c * self.r0(l) * &self.b
    }
}

fn assembled_matrix<K: KreinFamily>(k: &K, l: SpectralParam) -> CMatrix {
    let r = assemble_resolvent(k, l).unwrap();
    let n = k.state_dim();
    let mut out = CMatrix::zeros(n, n);
    for (j, e) in standard_basis(n).iter().enumerate() {
        out.set_column(j, &r.apply(e));
    }
    out
}

#[test]
fn assembly_matches_direct_inverse() {
    for seed in 0..20 {
        let w = Woodbury::random(seed, 3 + (seed % 5) as usize, 1 + (seed % 3) as usize);
        for l in [0.5, -0.8, 2.0] {
            let direct = w.direct(lam(l));
            let err = mat_max_abs(&(assembled_matrix(&w, lam(l)) - &direct)) / mat_max_abs(&direct);
            assert!(err <= 1e-12, "seed {seed} λ {l}: {err:e}");
        }
    }
}

#[test]
fn identities_hold_to_round_off() {
    let w = Woodbury::random(11, 6, 2);
    let probes = standard_basis(6);
    for (l, mu) in [(1.0, 2.0), (-1.0, 0.5), (3.0, -3.0)] {
        assert!(resolvent_identity_residual(&Perturbed(&w), lam(l), lam(mu), &probes).unwrap() <= 1e-12);
        assert!(resolvent_identity_residual(&Free(&w), lam(l), lam(mu), &probes).unwrap() <= 1e-12);
        assert!(gamma_difference_residual(&w, lam(l), lam(mu)).unwrap() <= 1e-12);
    }
}

#[test]
fn skewness_needs_the_right_inner_product() {
    let w = Woodbury::random(5, 5, 2);
    let probes = standard_basis(5);
    let ip = GramMatrix(w.m.clone());
    for l in [0.7, 1.5] {
        assert!(skew_adjointness_residual(&Perturbed(&w), lam(l), &ip, &probes).unwrap() <= 1e-12);
        assert!(skew_adjointness_residual(&Free(&w), lam(l), &ip, &probes).unwrap() <= 1e-12);
        assert!(skew_adjointness_residual(&Perturbed(&w), lam(l), &Euclidean, &probes).unwrap() > 1e-3);
    }
}

#[test]
fn explicit_matrix_resolvent_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_matrix(&mut rng, 4, 4);
    let r = move |l: SpectralParam, x: &CVector| Ok(inverse(&(CMatrix::identity(4, 4) * c(l.value()) - &a)) * x);
    let res = resolvent_identity_residual(&r, lam(3.0), lam(4.5), &standard_basis(4)).unwrap();
    assert!(res <= 1e-12, "{res:e}");
}

struct Singular;

impl KreinFamily for Singular {
    fn state_dim(&self) -> usize {
        2
    }
    fn aux_dim(&self) -> usize {
        2
    }
    fn free_resolvent(&self, l: SpectralParam, x: &CVector) -> CVector {
        x / c(l.value())
    }
    fn g(&self, _: SpectralParam, z: &CVector) -> CVector {
        z.clone()
    }
    fn g_breve(&self, _: SpectralParam, x: &CVector) -> CVector {
        x.clone()
    }
    fn gamma(&self, _: SpectralParam) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)])
    }
}

#[test]
fn singular_gamma_is_reported() {
    assert!(matches!(assemble_resolvent(&Singular, lam(1.0)), Err(KreinError::SingularGamma { .. })));
}

#[test]
fn positive_only_families_reject_negative_lambda() {
    struct Pos;
    impl KreinFamily for Pos {
        fn state_dim(&self) -> usize {
            1
        }
        fn aux_dim(&self) -> usize {
            0
        }
        fn admissibility(&self) -> Admissibility {
            Admissibility::Positive
        }
        fn free_resolvent(&self, l: SpectralParam, x: &CVector) -> CVector {
            x / c(l.value())
        }
        fn g(&self, _: SpectralParam, _: &CVector) -> CVector {
            CVector::zeros(1)
        }
        fn g_breve(&self, _: SpectralParam, _: &CVector) -> CVector {
            CVector::zeros(0)
        }
        fn gamma(&self, _: SpectralParam) -> CMatrix {
            CMatrix::zeros(0, 0)
        }
    }
    assert!(matches!(assemble_resolvent(&Pos, lam(-1.0)), Err(KreinError::InadmissibleLambda { .. })));
    assert!(assemble_resolvent(&Pos, lam(1.0)).is_ok());
}

#[test]
fn cayley_steps_of_a_rotation() {
    let w = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)]);
    let r = move |l: SpectralParam, x: &CVector| Ok(inverse(&(CMatrix::identity(2, 2) * c(l.value()) - &w)) * x);
    let mut errs = Vec::new();
    for steps in [100usize, 200, 400] {
        let dt = 2.0 / steps as f64;
        let mut x = CVector::from_vec(vec![c(1.0), c(0.0)]);
        for _ in 0..steps {
            x = cayley_step(&r, dt, &x).unwrap();
        }
        assert!((x.norm() - 1.0).abs() <= 1e-13);
        // each step rotates by exactly 2·atan(dt/2)
        let angle = steps as f64 * 2.0 * (dt / 2.0).atan();
        assert!((x[0].re - angle.cos()).abs() <= 1e-13 && (x[1].re + angle.sin()).abs() <= 1e-13);
        errs.push(((x[0].re - 2.0f64.cos()).powi(2) + (x[1].re + 2.0f64.sin()).powi(2)).sqrt());
    }
    for pair in errs.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((3.9..4.1).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn cayley_conserves_the_gram_norm() {
    let w = Woodbury::random(21, 6, 2);
    let ip = GramMatrix(w.m.clone());
    let r = Perturbed(&w);
    let mut x = CVector::from_fn(6, |i, _| Complex64::new(1.0 / (1.0 + i as f64), 0.3 * i as f64));
    let n0 = ip.norm(&x);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        x = cayley_step(&r, 0.05, &x).unwrap();
        worst = worst.max((ip.norm(&x) - n0).abs() / n0);
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

fn arb_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| CMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| Complex64::new(a, b))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_skew_generators(s in arb_matrix(4), x in arb_matrix(4), l in 0.2f64..4.0, mu in 0.2f64..4.0) {
        prop_assume!((l - mu).abs() > 1e-2);
        let gm = CMatrix::identity(4, 4) + x.adjoint() * &x;
        let a = inverse(&gm) * skew_hermitian(&s);
        let r = move |l: SpectralParam, v: &CVector| Ok(inverse(&(CMatrix::identity(4, 4) * c(l.value()) - &a)) * v);
        let probes = standard_basis(4);
        prop_assert!(resolvent_identity_residual(&r, lam(l), lam(mu), &probes).unwrap() <= 1e-10);
        prop_assert!(resolvent_identity_residual(&r, lam(-l), lam(mu), &probes).unwrap() <= 1e-10);
        let ip = GramMatrix(gm.clone());
        prop_assert!(skew_adjointness_residual(&r, lam(l), &ip, &probes).unwrap() <= 1e-10);
        let v0 = CVector::from_fn(4, |i, _| c(1.0 + i as f64));
        let v1 = cayley_step(&r, 1.0 / l, &v0).unwrap();
        prop_assert!((ip.norm(&v1) - ip.norm(&v0)).abs() <= 1e-10 * ip.norm(&v0));
    }

    #[test]
    fn random_woodbury_families(seed in 0u64..10_000, l in 0.2f64..4.0) {
        let w = Woodbury::random(seed, 5, 2);
        let direct = w.direct(lam(l));
        let err = vec_max_abs(&(assembled_matrix(&w, lam(l)) - &direct).column(0).into_owned());
        prop_assert!(err <= 1e-10 * mat_max_abs(&direct));
    }
}
