use kreinwave_core::halfline::dirichlet_convolve;
use kreinwave_core::krein::{
    gamma_difference_residual, resolvent_identity_residual, KreinFamily, Perturbed, SpectralParam,
};
use kreinwave_core::linalg::{c, CMatrix, CVector};
use kreinwave_core::stargraph::*;
use kreinwave_core::KreinError;
use num_complex::Complex64;

fn single(theta: f64, h: f64) -> StarGraphConfig {
    StarGraphConfig::new(CMatrix::from_element(1, 1, c(theta)), h, 30.0).unwrap()
}

fn coupled(h: f64) -> StarGraphConfig {
    let theta = CMatrix::from_row_slice(
        3,
        3,
        &[c(2.0), Complex64::new(0.3, 0.2), c(0.1), Complex64::new(0.3, -0.2), c(1.0), c(0.0), c(0.1), c(0.0), c(0.5)],
    );
    StarGraphConfig::new(theta, h, 30.0).unwrap()
}

fn bump(cfg: &StarGraphConfig) -> EdgeField {
    EdgeField::from_fn(cfg, |k, x| c((1.0 + k as f64) * (-(x - 2.0 - k as f64).powi(2)).exp()))
}

fn lam(x: f64) -> SpectralParam {
    SpectralParam::new(x).unwrap()
}

#[test]
fn discrete_kernel_matches_closed_form() {
    for cfg in [single(1.0, 0.01), coupled(0.05)] {
        let w = cfg.grid().weights();
        for (j, node) in [(0, 0), (0, 37), (cfg.n() - 1, 150)] {
            let mut delta = EdgeField::zeros(&cfg);
            delta.edge_mut(j)[node] = c(1.0 / w[node]);
            // the tail guard does not apply to a point mass inside the grid
            let lambda = 1.3;
            let out = a_theta_resolvent_apply(&cfg, lambda, &delta).unwrap();
            let y = cfg.grid().x(node);
            for k in 0..cfg.n() {
                for (i, v) in out.edge(k).iter().enumerate() {
                    let exact = resolvent_kernel(&cfg, lambda, k, cfg.grid().x(i), j, y).unwrap();
                    assert!((v - exact).norm() <= 1e-12, "k {k} i {i}: {v} vs {exact}");
                }
            }
        }
    }
}

#[test]
fn closed_kernel_is_dirichlet_plus_vertex_term() {
    let cfg = single(1.0, 0.01);
    for (x, y) in [(0.5, 1.5), (2.0, 0.1), (0.0, 0.0)] {
        let k = resolvent_kernel(&cfg, 1.0, 0, x, 0, y).unwrap();
        let exact = kreinwave_core::halfline::dirichlet_green(1.0, x, y) + (-(x + y)).exp() / 2.0;
        assert!((k.re - exact).abs() < 1e-15);
    }
}

fn slope(errors: &[f64]) -> f64 {
    (errors[errors.len() - 2] / errors[errors.len() - 1]).log2()
}

#[test]
fn vertex_residual_and_defect_converge_at_second_order() {
    let mut vertex = Vec::new();
    let mut defect = Vec::new();
    for h in [0.04, 0.02, 0.01] {
        let cfg = coupled(h);
        let psi = bump(&cfg);
        let phi = a_theta_resolvent_apply(&cfg, 1.0, &psi).unwrap();
        vertex.push(vertex_residual(&cfg, &phi));
        defect.push(resolvent_defect(&cfg, 1.0, &phi, &psi));
    }
    assert!(slope(&vertex) >= 1.9, "{vertex:?}");
    assert!(slope(&defect) >= 1.9, "{defect:?}");
    assert!(slope(&vertex[..2]) >= 1.9 && slope(&defect[..2]) >= 1.9);
}

#[test]
fn huge_theta_gives_dirichlet_resolvent() {
    let cfg = StarGraphConfig::new(CMatrix::identity(2, 2) * c(1e6), 0.01, 30.0).unwrap();
    let psi = bump(&cfg);
    let phi = a_theta_resolvent_apply(&cfg, 1.0, &psi).unwrap();
    for k in 0..2 {
        let d = dirichlet_convolve(cfg.grid(), 1.0, psi.edge(k));
        let dev = phi.edge(k).iter().zip(&d).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        assert!(dev < 1e-5);
    }
}

/// `(−W_Θ + λ)⁻¹(f, g)` by a direct solve: `φ = (−A_Θ+λ²)⁻¹(g + λf)`, `ψ = λφ − f`.
fn direct_wave_resolvent(cfg: &StarGraphConfig, lambda: f64, s: &GraphState) -> GraphState {
    let mut rhs = s.psi.clone();
    for k in 0..cfg.n() {
        let f = s.phi.edge(k).to_vec();
        for (v, fi) in rhs.edge_mut(k).iter_mut().zip(f) {
            *v += fi * lambda;
        }
    }
    let phi = a_theta_resolvent_apply(cfg, lambda, &rhs).unwrap();
    let mut psi = phi.scale(c(lambda));
    for k in 0..cfg.n() {
        let f = s.phi.edge(k).to_vec();
        for (v, fi) in psi.edge_mut(k).iter_mut().zip(f) {
            *v -= fi;
        }
    }
    GraphState { phi, psi }
}

fn bump_state(cfg: &StarGraphConfig) -> GraphState {
    GraphState {
        phi: bump(cfg),
        psi: EdgeField::from_fn(cfg, |k, x| c((x - 1.0) * (-(x - 1.5 - k as f64).powi(2)).exp())),
    }
}

#[test]
fn krein_assembly_matches_direct_solve() {
    let mut errs = Vec::new();
    for h in [0.02, 0.01] {
        let cfg = coupled(h);
        let s = bump_state(&cfg);
        let krein = w_theta_resolvent_apply(&cfg, 1.0, &s).unwrap();
        let direct = direct_wave_resolvent(&cfg, 1.0, &s);
        errs.push(krein.max_diff(&direct));
        assert!(vertex_residual(&cfg, &krein.phi) < 1e-3);
    }
    // the discrete Krein formula and the direct solve are the same algebra
    assert!(errs.iter().all(|e| *e < 1e-12), "{errs:?}");
}

#[test]
fn wave_resolvent_inverts_on_dirichlet_states() {
    // φ(0) = φ′(0) = 0, so τφ = 0 and ζ = 0
    let mut errs = Vec::new();
    for h in [0.02, 0.01] {
        let cfg = coupled(h);
        let phi = EdgeField::from_fn(&cfg, |k, x| c(x * x * (-(x - 1.0 - k as f64).powi(2)).exp()));
        let psi = EdgeField::from_fn(&cfg, |_, x| c(x * x * x * (-x).exp()));
        let l = 1.5;
        // (−W + λ)(φ, ψ) = (λφ − ψ, λψ − φ″) with φ″ exact
        let f = EdgeField::from_fn(&cfg, |k, x| {
            let a = 1.0 + k as f64;
            c(l * x * x * (-(x - a).powi(2)).exp() - x * x * x * (-x).exp())
        });
        let g = EdgeField::from_fn(&cfg, |k, x| {
            let a = 1.0 + k as f64;
            let e = (-(x - a).powi(2)).exp();
            let u = x - a;
            let second = e * (2.0 - 8.0 * x * u + x * x * (4.0 * u * u - 2.0));
            c(l * x * x * x * (-x).exp() - second)
        });
        let out = w_theta_resolvent_apply(&cfg, l, &GraphState { phi: f, psi: g }).unwrap();
        let scale = phi.max_abs().max(psi.max_abs());
        errs.push(out.max_diff(&GraphState { phi, psi }) / scale);
    }
    assert!(errs[1] < 1e-4 && slope(&errs) > 1.8, "{errs:?}");
}

#[test]
fn zero_in_zero_out() {
    let cfg = coupled(0.05);
    let z = GraphState::zeros(&cfg);
    assert_eq!(w_theta_resolvent_apply(&cfg, 2.0, &z).unwrap().max_diff(&z), 0.0);
}

#[test]
fn wave_resolvent_identity_converges() {
    let mut res = Vec::new();
    for h in [0.02, 0.01] {
        let cfg = coupled(h);
        let fam = StarGraphFamily(&cfg);
        let probe = bump_state(&cfg).to_flat();
        res.push(resolvent_identity_residual(&Perturbed(&fam), lam(1.0), lam(2.0), &[probe]).unwrap());
    }
    assert!(res[1] <= 1e-4, "{res:?}");
    let ratio = res[0] / res[1];
    assert!((3.0..5.0).contains(&ratio), "{res:?}");
}

#[test]
fn gamma_difference_by_quadrature() {
    let cfg = single(1.0, 0.01);
    let g = gamma_theta(&cfg, 1.0) - gamma_theta(&cfg, 2.0);
    assert!((g[(0, 0)].re + 0.5).abs() < 1e-15);
    let fam = StarGraphFamily(&cfg);
    assert!(gamma_difference_residual(&fam, lam(1.0), lam(2.0)).unwrap() < 1e-4);
    let bg = fam.g_breve(lam(2.0), &fam.g(lam(1.0), &CVector::from_element(1, c(1.0))));
    assert!(((bg[0] * -1.0).re + 0.5).abs() < 1e-4);
    assert!(matches!(gamma_difference_residual(&fam, lam(1.0), lam(1.0)), Err(KreinError::EqualSpectralParams { .. })));
}

#[test]
fn energy_values() {
    let cfg = single(2.0, 0.01);
    let s = GraphState { phi: EdgeField::from_fn(&cfg, |_, x| c((-x).exp())), psi: EdgeField::zeros(&cfg) };
    assert!((energy(&cfg, &s) - 2.5).abs() < 1e-4);
    assert_eq!(energy(&cfg, &GraphState::zeros(&cfg)), 0.0);
    let t = bump_state(&cfg);
    let scaled = t.scale(Complex64::new(1.5, -2.0));
    assert!((energy(&cfg, &scaled) - 6.25 * energy(&cfg, &t)).abs() <= 1e-13 * energy(&cfg, &scaled));
}

fn pulse(cfg: &StarGraphConfig, center: f64) -> GraphState {
    GraphState { phi: EdgeField::from_fn(cfg, |_, x| c((-(x - center).powi(2)).exp())), psi: EdgeField::zeros(cfg) }
}

#[test]
fn evolution_conserves_energy() {
    let cfg = coupled(0.01);
    let s = pulse(&cfg, 5.0);
    let e0 = energy(&cfg, &s);
    let mut worst = 0.0f64;
    evolve_with(&cfg, &s, 0.01, 1000, 1e-8, |_, st| worst = worst.max((energy(&cfg, st) - e0).abs() / e0)).unwrap();
    assert!(worst <= 1e-6, "{worst:e}");
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn pulse_follows_characteristics_before_vertex() {
    let cfg = single(1.0, 0.01);
    let s = pulse(&cfg, 10.0);
    let t_end = 4.0;
    let traj = evolve(&cfg, &s, 0.01, 400, 1e-8).unwrap();
    let last = traj.last().unwrap();
    let mut worst = 0.0f64;
    for (i, v) in last.phi.edge(0).iter().enumerate() {
        let x = cfg.grid().x(i);
        let exact = 0.5 * ((-(x - t_end - 10.0).powi(2)).exp() + (-(x + t_end - 10.0).powi(2)).exp());
        worst = worst.max((v.re - exact).abs());
    }
    assert!(worst <= 1e-3, "{worst:e}");
}

#[test]
fn evolution_of_zero_is_zero() {
    let cfg = coupled(0.05);
    let z = GraphState::zeros(&cfg);
    for s in evolve(&cfg, &z, 0.05, 20, 1e-8).unwrap() {
        assert_eq!(s.max_diff(&z), 0.0);
    }
}

#[test]
fn evolution_rejects_states_off_the_domain() {
    let cfg = single(1.0, 0.01);
    let s = GraphState { phi: EdgeField::from_fn(&cfg, |_, x| c((-x * x).exp())), psi: EdgeField::zeros(&cfg) };
    assert!(matches!(evolve(&cfg, &s, 0.01, 1, 1e-6), Err(KreinError::DomainViolation { .. })));
}
