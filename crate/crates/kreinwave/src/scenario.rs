//! One runner per scenario kind. Each writes its tables into the scenario
//! directory and appends its checks to `checks`, so a runner that stops on an
//! error still leaves everything it finished.

use std::f64::consts::PI;

use kreinwave_core::check::CheckOutcome;
use kreinwave_core::driftwave::{
    gamma_closed, gamma_from_s_integral, gamma_lattice, gamma_lattice_tail, gamma_operator, gamma_row, lattice_model,
    lw_green, DriftConfig, FourierLattice,
};
use kreinwave_core::krein::{cayley_step, InnerProduct, SpectralParam};
use kreinwave_core::linalg::{c, CVector};
use kreinwave_core::matrix_model::{
    c_split_extension_resolvent, energy_gram, gamma_theta_generalized, run_identity_suite, GramVariant, MatrixModel,
    SuiteConfig,
};
use kreinwave_core::pointwave3d::Grid3;
use kreinwave_core::pointwave3d::{
    evolve_radial_with, radial_domain_residual, radial_energy, RadialGridField, RadialState,
};
use kreinwave_core::stargraph::{
    a_theta_resolvent_apply, energy, evolve_with, resolvent_kernel, vertex_residual, EdgeField, GraphState,
};
use num_complex::Complex64;

use crate::config::{DriftGamma, DriftSmoke, PointwaveRun, Scenario, StargraphRun, VerifyMatrix};
use crate::output::{num, Artifacts};
use crate::RunError;

pub fn run(s: &Scenario, out: &Artifacts, checks: &mut Vec<CheckOutcome>) -> Result<(), RunError> {
    match s {
        Scenario::VerifyMatrix(s) => verify_matrix(s, out, checks),
        Scenario::StargraphRun(s) => stargraph_run(s, out, checks),
        Scenario::PointwaveRun(s) => pointwave_run(s, out, checks),
        Scenario::DriftGamma(s) => drift_gamma(s, out, checks),
        Scenario::DriftSmoke(s) => drift_smoke(s, out, checks),
    }
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify_matrix(s: &VerifyMatrix, out: &Artifacts, checks: &mut Vec<CheckOutcome>) -> Result<(), RunError> {
    let mut table = out.csv("checks.csv", &["seed", "n", "m", "drift", "check", "residual", "tolerance", "status"])?;
    let suite = SuiteConfig { lambdas: s.lambdas.clone(), tolerance: s.tolerance };
    for i in 0..s.count as u64 {
        let seed = s.seed.wrapping_add(i);
        let (n, m, drift) = s.sizes(seed);
        let model = MatrixModel::random(seed, n, m, drift)?;
        for o in run_identity_suite(&model, &suite) {
            table.row([
                seed.to_string(),
                n.to_string(),
                m.to_string(),
                drift.to_string(),
                o.name.clone(),
                num(o.residual),
                num(o.tolerance),
                status(o.passed).to_string(),
            ])?;
            checks.push(CheckOutcome { name: format!("seed{seed}/{}", o.name), ..o });
        }
    }
    table.finish()?;
    Ok(())
}

fn stargraph_run(s: &StargraphRun, out: &Artifacts, checks: &mut Vec<CheckOutcome>) -> Result<(), RunError> {
    let cfg = s.graph()?;
    let grid = *cfg.grid();
    let w = grid.weights();

    // discrete resolvent applied to point masses against the closed kernel
    let mut worst = 0.0f64;
    for (j, node) in [(0, 0), (cfg.n() - 1, grid.nodes() / 4)] {
        let mut delta = EdgeField::zeros(&cfg);
        delta.edge_mut(j)[node] = c(1.0 / w[node]);
        let phi = a_theta_resolvent_apply(&cfg, s.kernel_lambda, &delta)?;
        for k in 0..cfg.n() {
            for (i, v) in phi.edge(k).iter().enumerate() {
                let exact = resolvent_kernel(&cfg, s.kernel_lambda, k, grid.x(i), j, grid.x(node))?;
                worst = worst.max((v - exact).norm());
            }
        }
    }
    checks.push(CheckOutcome::at_most("resolvent_kernel", worst, s.kernel_tolerance));

    let start = GraphState {
        phi: EdgeField::from_fn(&cfg, |_, x| c((-((x - s.pulse_center) / s.pulse_width).powi(2)).exp())),
        psi: EdgeField::zeros(&cfg),
    };
    let e0 = energy(&cfg, &start);
    let mut table = out.csv("energy.csv", &["step", "t", "energy", "vertex_residual"])?;
    let mut drift = 0.0f64;
    let mut vertex = 0.0f64;
    let mut io: std::io::Result<()> = Ok(());
    let end = evolve_with(&cfg, &start, s.dt, s.steps, s.vertex_tolerance, |step, st| {
        let e = energy(&cfg, st);
        let r = vertex_residual(&cfg, &st.phi);
        drift = drift.max((e - e0).abs() / e0);
        vertex = vertex.max(r);
        if io.is_ok() {
            io = table.row([step.to_string(), num(step as f64 * s.dt), num(e), num(r)]);
        }
    });
    io?;
    table.finish()?;
    let end = end?;
    checks.push(CheckOutcome::at_most("energy_drift", drift, s.energy_tolerance));
    checks.push(CheckOutcome::at_most("vertex_residual", vertex, s.vertex_tolerance));

    let mut field = out.csv("field.csv", &["edge", "x", "phi", "psi"])?;
    for k in 0..cfg.n() {
        for (i, (p, q)) in end.phi.edge(k).iter().zip(end.psi.edge(k)).enumerate() {
            field.row([k.to_string(), num(grid.x(i)), num(p.re), num(q.re)])?;
        }
    }
    field.finish()?;
    Ok(())
}

fn radial_start(s: &PointwaveRun) -> Result<RadialState, RunError> {
    let bump = |r: f64| {
        let t = (r - s.pulse_center) / s.pulse_width;
        if t.abs() < 1.0 {
            (1.0 - t * t).powi(4)
        } else {
            0.0
        }
    };
    // rφ is exactly ζ/4π + θζ·r near the origin, so the state starts in the domain
    let flat = |r: f64| (-(r / 2.0).powi(8)).exp();
    let zeta = s.zeta;
    let singular = move |r: f64| (zeta / (4.0 * PI) + s.theta * zeta * r) * flat(r) / r;
    Ok(RadialState {
        phi: RadialGridField::from_fn(s.h, s.r_max, |r| singular(r) + bump(r), Some(zeta))?,
        psi: RadialGridField::from_fn(s.h, s.r_max, |_| 0.0, Some(0.0))?,
        zeta,
    })
}

/// `φ(|x|)` from linear interpolation of `rφ`, with `rφ(0) = ζ/4π`.
fn resample(state: &RadialState, p: [f64; 3]) -> f64 {
    let rho = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let h = state.phi.h();
    let u = |j: usize| if j == 0 { state.zeta / (4.0 * PI) } else { j as f64 * h * state.phi.values()[j - 1] };
    let s = rho / h;
    let j = s.floor() as usize;
    if j >= state.phi.len() {
        return 0.0;
    }
    let t = s - j as f64;
    ((1.0 - t) * u(j) + t * u(j + 1)) / rho
}

fn pointwave_run(s: &PointwaveRun, out: &Artifacts, checks: &mut Vec<CheckOutcome>) -> Result<(), RunError> {
    let start = radial_start(s)?;
    checks.push(CheckOutcome::at_most("domain_residual", radial_domain_residual(s.theta, &start), s.domain_tolerance));
    let e0 = radial_energy(s.theta, &start)?;
    let mut table = out.csv("radial.csv", &["step", "t", "r", "phi", "psi", "zeta", "energy"])?;
    let mut drift = 0.0f64;
    let mut io: std::io::Result<()> = Ok(());
    let mut energy_err = None;
    let end = evolve_radial_with(s.theta, &start, s.dt, s.steps, s.domain_tolerance, |step, st| {
        let e = match radial_energy(s.theta, st) {
            Ok(e) => e,
            Err(err) => {
                energy_err.get_or_insert(err);
                f64::NAN
            }
        };
        drift = drift.max((e - e0).abs() / e0);
        if io.is_ok() && (step % s.record_every == 0 || step == s.steps) {
            let t = num(step as f64 * s.dt);
            for (i, (p, q)) in st.phi.values().iter().zip(st.psi.values()).enumerate() {
                io = table.row([step.to_string(), t.clone(), num(st.phi.r(i)), num(*p), num(*q), num(st.zeta), num(e)]);
                if io.is_err() {
                    break;
                }
            }
        }
    });
    io?;
    table.finish()?;
    let end = end?;
    if let Some(err) = energy_err {
        return Err(err.into());
    }
    checks.push(CheckOutcome::at_most("energy_drift", drift, s.energy_tolerance));

    if s.grid_n > 0 {
        let grid = Grid3::new(s.grid_n, s.grid_h)?;
        let values = grid.sample(|p| resample(&end, p));
        out.grid("phi_final.bin", [s.grid_n; 3], &values)?;
    }
    Ok(())
}

fn drift_gamma(s: &DriftGamma, out: &Artifacts, checks: &mut Vec<CheckOutcome>) -> Result<(), RunError> {
    let mut table = out.csv("gamma.csv", &["lambda", "v", "theta", "gamma_closed", "gamma_quadrature", "rel_err"])?;
    let mut worst = 0.0f64;
    let mut quad = 0.0f64;
    for &l in &s.lambdas {
        for &v in &s.speeds {
            for &theta in &s.thetas {
                let row = gamma_row(l, v, theta)?;
                table.row([
                    num(l),
                    num(v),
                    num(theta),
                    num(row.gamma_closed),
                    num(row.gamma_quadrature),
                    num(row.rel_err),
                ])?;
                worst = worst.max(row.rel_err);
                let exact = gamma_from_s_integral(&DriftConfig::new([v, 0.0, 0.0], theta)?, l)?;
                quad = quad.max((row.gamma_quadrature - exact).abs() / exact.abs());
            }
        }
    }
    table.finish()?;
    checks.push(CheckOutcome::at_most("closed_vs_quadrature", worst, s.tolerance));
    checks.push(CheckOutcome::at_most("quadrature_vs_exact_r_integral", quad, s.quadrature_tolerance));

    let mut limit = 0.0f64;
    for &l in &s.lambdas {
        for &theta in &s.thetas {
            let rest = gamma_closed(&DriftConfig::new([0.0; 3], theta)?, l)?;
            for &v in &s.limit_speeds {
                let g = gamma_closed(&DriftConfig::new([v, 0.0, 0.0], theta)?, l)?;
                limit = limit.max((g - rest).abs() / rest.abs() / (v * v));
            }
        }
    }
    checks.push(CheckOutcome::at_most("small_drift_limit", limit, s.limit_factor));
    Ok(())
}

fn drift_smoke(s: &DriftSmoke, out: &Artifacts, checks: &mut Vec<CheckOutcome>) -> Result<(), RunError> {
    let d = s.drift()?;
    let lattice = FourierLattice::new(s.box_len, s.cutoff)?;
    let large = FourierLattice::new(s.large_box, s.large_cutoff)?;
    let model = lattice_model(&d, &lattice)?;

    let lambdas: Vec<f64> = s.lambdas.iter().flat_map(|&l| [-l, l]).collect();
    let suite = SuiteConfig { lambdas, tolerance: s.identity_tolerance };
    for o in run_identity_suite(&model, &suite) {
        checks.push(CheckOutcome { name: format!("lattice/{}", o.name), ..o });
    }

    let mut table = out.csv(
        "gamma.csv",
        &["lambda", "gamma_sum", "gamma_dense", "gamma_large", "gamma_tail", "gamma_operator", "gamma_closed"],
    )?;
    let mut dense_err = 0.0f64;
    let mut conv = 0.0f64;
    for &l in &s.lambdas {
        let sum = gamma_lattice(&d, l, &lattice)?;
        let dense = gamma_theta_generalized(&model, SpectralParam::new(l)?)[(0, 0)];
        dense_err = dense_err.max((sum - dense).norm() / sum.norm());
        let big = gamma_lattice(&d, l, &large)?.re;
        let tail = gamma_lattice_tail(&d, l, s.large_cutoff);
        let op = gamma_operator(&d, l)?;
        conv = conv.max((big + tail - op).abs() / op.abs());
        table.row([num(l), num(sum.re), num(dense.re), num(big), num(tail), num(op), num(gamma_closed(&d, l)?)])?;
    }
    table.finish()?;
    checks.push(CheckOutcome::at_most("gamma_dense_vs_sum", dense_err, s.identity_tolerance));
    checks.push(CheckOutcome::at_most("gamma_large_lattice_vs_operator", conv, s.convergence_tolerance));

    let gram = energy_gram(&model, GramVariant::CWeightedTheta)?;
    let r = c_split_extension_resolvent(&model, SpectralParam::new(2.0 / s.dt)?)?;
    let step = |_: SpectralParam, x: &CVector| Ok(&r * x);
    // anything in the range of the resolvent lies in the domain of the extension
    let phase = 0.37 * (1.0 + (s.seed % 1000) as f64);
    let seed =
        CVector::from_fn(r.ncols(), |i, _| Complex64::new((phase * (i + 1) as f64).sin(), (0.11 * i as f64).cos()));
    let mut x = &r * seed;
    let e0 = gram.norm(&x);
    let mut table = out.csv("energy.csv", &["step", "t", "energy"])?;
    table.row(["0".to_string(), num(0.0), num(e0)])?;
    let mut drift = 0.0f64;
    for k in 1..=s.steps {
        x = cayley_step(&step, s.dt, &x)?;
        let e = gram.norm(&x);
        drift = drift.max((e - e0).abs() / e0);
        table.row([k.to_string(), num(k as f64 * s.dt), num(e)])?;
    }
    table.finish()?;
    checks.push(CheckOutcome::at_most("energy_drift", drift, s.energy_tolerance));

    if s.green_n > 0 {
        let grid = Grid3::new(s.green_n, s.green_h)?;
        let values: Result<Vec<f64>, _> = (0..grid.len()).map(|i| lw_green(&d, grid.point(i))).collect();
        out.grid("green.bin", [s.green_n; 3], &values?)?;
    }
    Ok(())
}
