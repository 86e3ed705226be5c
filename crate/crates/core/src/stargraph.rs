//! Waves on a star graph: `n` half-lines glued at a vertex through
//! `φ_k′(0+) = Σ_j Θ_kj φ_j(0+)`.
//!
//! Fields are sampled per edge on a common [`HalfLineGrid`]. The charge of a
//! state is its vertex value, `ζ_k = φ_k(0+)`, because the singular profile is
//! the constant 1 on every edge.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{KreinError, Result};
use crate::halfline::{
    decay_check, dirichlet_convolve, dirichlet_green, exp_moment, one_sided_derivative, second_difference,
    HalfLineGrid, RobinWaveSystem,
};
use crate::krein::{assemble_resolvent, cayley_step, Admissibility, KreinFamily, SpectralParam};
use crate::linalg::{
    c, guarded_inverse, hermitian_eigenvalues, hermitian_part_residual, mat_max_abs, CMatrix, CVector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct StarGraphConfig {
    theta: CMatrix,
    grid: HalfLineGrid,
}

impl StarGraphConfig {
    /// Θ must be Hermitian positive definite; the grid needs `L ≥ 20h`.
    pub fn new(theta: CMatrix, h: f64, len: f64) -> Result<Self> {
        if theta.nrows() == 0 || theta.nrows() != theta.ncols() {
            return Err(KreinError::InvalidInput(format!(
                "Θ must be square and nonempty, got {}x{}",
                theta.nrows(),
                theta.ncols()
            )));
        }
        if hermitian_part_residual(&theta) > 1e-12 * mat_max_abs(&theta).max(1.0) {
            return Err(KreinError::InvalidInput("Θ is not Hermitian".into()));
        }
        if hermitian_eigenvalues(&theta)[0] <= 0.0 {
            return Err(KreinError::NotPositiveDefinite("Θ"));
        }
        Ok(StarGraphConfig { theta, grid: HalfLineGrid::new(h, len)? })
    }

    pub fn n(&self) -> usize {
        self.theta.nrows()
    }

    pub fn theta(&self) -> &CMatrix {
        &self.theta
    }

    pub fn grid(&self) -> &HalfLineGrid {
        &self.grid
    }
}

/// One row of samples per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    edges: usize,
    nodes: usize,
    values: Vec<Complex64>,
}

impl EdgeField {
    pub fn zeros(cfg: &StarGraphConfig) -> Self {
        let nodes = cfg.grid.nodes();
        EdgeField { edges: cfg.n(), nodes, values: vec![Complex64::new(0.0, 0.0); cfg.n() * nodes] }
    }

    /// Samples `f(edge, x)`.
    pub fn from_fn(cfg: &StarGraphConfig, mut f: impl FnMut(usize, f64) -> Complex64) -> Self {
        let mut out = Self::zeros(cfg);
        for k in 0..out.edges {
            for i in 0..out.nodes {
                out.values[k * out.nodes + i] = f(k, cfg.grid.x(i));
            }
        }
        out
    }

    pub fn edges(&self) -> usize {
        self.edges
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edge(&self, k: usize) -> &[Complex64] {
        &self.values[k * self.nodes..(k + 1) * self.nodes]
    }

    pub fn edge_mut(&mut self, k: usize) -> &mut [Complex64] {
        &mut self.values[k * self.nodes..(k + 1) * self.nodes]
    }

    pub fn vertex_values(&self) -> CVector {
        CVector::from_fn(self.edges, |k, _| self.values[k * self.nodes])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        EdgeField { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn max_diff(&self, other: &EdgeField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |a, (x, y)| a.max((x - y).norm()))
    }
}

/// Position and velocity on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphState {
    pub phi: EdgeField,
    pub psi: EdgeField,
}

impl GraphState {
    pub fn zeros(cfg: &StarGraphConfig) -> Self {
        GraphState { phi: EdgeField::zeros(cfg), psi: EdgeField::zeros(cfg) }
    }

    /// `ζ_k = φ_k(0+)`.
    pub fn zeta(&self) -> CVector {
        self.phi.vertex_values()
    }

    pub fn to_flat(&self) -> CVector {
        CVector::from_iterator(self.phi.values.len() * 2, self.phi.values.iter().chain(&self.psi.values).copied())
    }

    pub fn from_flat(cfg: &StarGraphConfig, x: &CVector) -> Self {
        let mut s = Self::zeros(cfg);
        let half = s.phi.values.len();
        s.phi.values.copy_from_slice(&x.as_slice()[..half]);
        s.psi.values.copy_from_slice(&x.as_slice()[half..]);
        s
    }

    pub fn scale(&self, s: Complex64) -> Self {
        GraphState { phi: self.phi.scale(s), psi: self.psi.scale(s) }
    }

    pub fn max_diff(&self, other: &GraphState) -> f64 {
        self.phi.max_diff(&other.phi).max(self.psi.max_diff(&other.psi))
    }
}

fn positive(lambda: f64) -> Result<SpectralParam> {
    SpectralParam::positive(lambda)
}

/// Kernel of `(−A_Θ + λ²)⁻¹` between `(edge k, x)` and `(edge j, y)`.
pub fn resolvent_kernel(cfg: &StarGraphConfig, lambda: f64, k: usize, x: f64, j: usize, y: f64) -> Result<Complex64> {
    positive(lambda)?;
    let coupling = guarded_inverse(&(cfg.theta.clone() + CMatrix::identity(cfg.n(), cfg.n()) * c(lambda)))?;
    let direct = if k == j { dirichlet_green(lambda, x, y) } else { 0.0 };
    Ok(coupling[(k, j)] * (-lambda * (x + y)).exp() + direct)
}

/// `(−A_Θ + λ²)⁻¹ψ`: the Dirichlet resolvent on each edge plus
/// `e^{−λx_k}(Θ+λ)⁻¹_kj ⟨e^{−λ·}, ψ_j⟩`.
pub fn a_theta_resolvent_apply(cfg: &StarGraphConfig, lambda: f64, psi: &EdgeField) -> Result<EdgeField> {
    positive(lambda)?;
    let grid = &cfg.grid;
    let fields: Vec<&[Complex64]> = (0..cfg.n()).map(|k| psi.edge(k)).collect();
    decay_check(grid, lambda, &fields)?;
    let coupling = guarded_inverse(&(cfg.theta.clone() + CMatrix::identity(cfg.n(), cfg.n()) * c(lambda)))?;
    let moments = CVector::from_fn(cfg.n(), |j, _| exp_moment(grid, lambda, psi.edge(j)));
    let coeff = coupling * moments;
    let mut out = EdgeField::zeros(cfg);
    for k in 0..cfg.n() {
        let d = dirichlet_convolve(grid, lambda, psi.edge(k));
        for (i, v) in out.edge_mut(k).iter_mut().enumerate() {
            *v = d[i] + coeff[k] * (-lambda * grid.x(i)).exp();
        }
    }
    Ok(out)
}

/// `Γ_Θ(λ) = −(λ + Θ)/λ`.
pub fn gamma_theta(cfg: &StarGraphConfig, lambda: f64) -> CMatrix {
    -(cfg.theta.clone() + CMatrix::identity(cfg.n(), cfg.n()) * c(lambda)) / c(lambda)
}

/// The Krein blocks of the wave extension, written on full states `(φ, ψ)`
/// with `φ = φ₀ + ζ` and `ζ = φ(0+)`.
pub struct StarGraphFamily<'a>(pub &'a StarGraphConfig);

impl StarGraphFamily<'_> {
    fn split<'x>(&self, x: &'x CVector) -> (Vec<&'x [Complex64]>, Vec<&'x [Complex64]>) {
        let nodes = self.0.grid.nodes();
        let n = self.0.n();
        let s = x.as_slice();
        (
            (0..n).map(|k| &s[k * nodes..(k + 1) * nodes]).collect(),
            (0..n).map(|k| &s[(n + k) * nodes..(n + k + 1) * nodes]).collect(),
        )
    }
}

impl KreinFamily for StarGraphFamily<'_> {
    fn state_dim(&self) -> usize {
        2 * self.0.n() * self.0.grid.nodes()
    }

    fn aux_dim(&self) -> usize {
        self.0.n()
    }

    fn admissibility(&self) -> Admissibility {
        Admissibility::Positive
    }

    fn free_resolvent(&self, lambda: SpectralParam, x: &CVector) -> CVector {
        let (l, grid, n) = (lambda.value(), &self.0.grid, self.0.n());
        let nodes = grid.nodes();
        let (phi, psi) = self.split(x);
        let mut out = CVector::zeros(x.len());
        for k in 0..n {
            let dphi = dirichlet_convolve(grid, l, phi[k]);
            let dpsi = dirichlet_convolve(grid, l, psi[k]);
            let zeta = phi[k][0];
            for i in 0..nodes {
                let e = (-l * grid.x(i)).exp();
                out[k * nodes + i] = dphi[i] * l + dpsi[i] + zeta * (e / l);
                out[(n + k) * nodes + i] = -phi[k][i] + dphi[i] * (l * l) + dpsi[i] * l + zeta * e;
            }
        }
        out
    }

    fn g(&self, lambda: SpectralParam, zeta: &CVector) -> CVector {
        let (l, grid, n) = (lambda.value(), &self.0.grid, self.0.n());
        let nodes = grid.nodes();
        let mut out = CVector::zeros(self.state_dim());
        for k in 0..n {
            for i in 0..nodes {
                let e = (-l * grid.x(i)).exp();
                out[k * nodes + i] = -zeta[k] * (e / l);
                out[(n + k) * nodes + i] = -zeta[k] * e;
            }
        }
        out
    }

    fn g_breve(&self, lambda: SpectralParam, x: &CVector) -> CVector {
        let (l, grid) = (lambda.value(), &self.0.grid);
        let (phi, psi) = self.split(x);
        let zeta = CVector::from_fn(self.0.n(), |k, _| phi[k][0]);
        let theta_zeta = &self.0.theta * &zeta;
        CVector::from_fn(self.0.n(), |k, _| {
            exp_moment(grid, l, phi[k]) * l + exp_moment(grid, l, psi[k]) - zeta[k] - theta_zeta[k] / l
        })
    }

    fn gamma(&self, lambda: SpectralParam) -> CMatrix {
        gamma_theta(self.0, lambda.value())
    }
}

/// `(−W_Θ + λ)⁻¹` on a graph state, assembled from the Krein blocks.
pub fn w_theta_resolvent_apply(cfg: &StarGraphConfig, lambda: f64, state: &GraphState) -> Result<GraphState> {
    let l = positive(lambda)?;
    let fields: Vec<&[Complex64]> = (0..cfg.n()).flat_map(|k| [state.phi.edge(k), state.psi.edge(k)]).collect();
    decay_check(&cfg.grid, lambda, &fields)?;
    let fam = StarGraphFamily(cfg);
    let r = assemble_resolvent(&fam, l)?;
    Ok(GraphState::from_flat(cfg, &r.apply(&state.to_flat())))
}

/// `max_k |φ_k′(0+) − (Θφ(0+))_k|` with the one-sided second-order stencil.
pub fn vertex_residual(cfg: &StarGraphConfig, phi: &EdgeField) -> f64 {
    let h = cfg.grid.h();
    let coupled = &cfg.theta * phi.vertex_values();
    (0..cfg.n()).fold(0.0, |a, k| a.max((one_sided_derivative(phi.edge(k), h) - coupled[k]).norm()))
}

/// `max |−φ″ + λ²φ − ψ|` over interior nodes, with the 3-point stencil.
pub fn resolvent_defect(cfg: &StarGraphConfig, lambda: f64, phi: &EdgeField, psi: &EdgeField) -> f64 {
    let h = cfg.grid.h();
    let mut worst = 0.0f64;
    for k in 0..cfg.n() {
        let (p, q) = (phi.edge(k), psi.edge(k));
        for i in 1..p.len() - 1 {
            worst = worst.max((-second_difference(p, h, i) + p[i] * (lambda * lambda) - q[i]).norm());
        }
    }
    worst
}

/// The energy conserved by [`evolve`]: `Σ‖φ_k′‖² + Σ‖ψ_k‖² + ⟨Θζ, ζ⟩`, with
/// difference quotients for `φ′` and the trapezoid rule for `ψ`.
pub fn energy(cfg: &StarGraphConfig, state: &GraphState) -> f64 {
    RobinWaveSystem::new(cfg.grid, cfg.theta.clone()).energy(&state.to_flat())
}

/// Largest violation of the vertex condition or of `φ(L) = 0`.
pub fn domain_residual(cfg: &StarGraphConfig, state: &GraphState) -> f64 {
    let last = cfg.grid.nodes() - 1;
    (0..cfg.n()).fold(vertex_residual(cfg, &state.phi), |a, k| a.max(state.phi.edge(k)[last].norm()))
}

/// Cayley steps with `λ = 2/dt` of the P1/lumped-mass discretisation; calls
/// `visit(step, state)` for the initial state and after every step.
pub fn evolve_with(
    cfg: &StarGraphConfig,
    state: &GraphState,
    dt: f64,
    steps: usize,
    threshold: f64,
    mut visit: impl FnMut(usize, &GraphState),
) -> Result<GraphState> {
    let residual = domain_residual(cfg, state);
    if !(residual <= threshold) {
        return Err(KreinError::DomainViolation { residual, threshold });
    }
    let sys = RobinWaveSystem::new(cfg.grid, cfg.theta.clone());
    let resolve = |l: SpectralParam, x: &CVector| sys.resolve(l, x);
    let mut x = state.to_flat();
    visit(0, state);
    for step in 1..=steps {
        x = cayley_step(&resolve, dt, &x)?;
        visit(step, &GraphState::from_flat(cfg, &x));
    }
    Ok(GraphState::from_flat(cfg, &x))
}

/// The whole trajectory, `steps + 1` states.
pub fn evolve(
    cfg: &StarGraphConfig,
    state: &GraphState,
    dt: f64,
    steps: usize,
    threshold: f64,
) -> Result<Vec<GraphState>> {
    let mut out = Vec::with_capacity(steps + 1);
    evolve_with(cfg, state, dt, steps, threshold, |_, s| out.push(s.clone()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_edge(theta: f64) -> StarGraphConfig {
        StarGraphConfig::new(CMatrix::from_element(1, 1, c(theta)), 0.01, 30.0).unwrap()
    }

    #[test]
    fn vertex_value_of_resolvent() {
        let cfg = one_edge(1.0);
        let psi = EdgeField::from_fn(&cfg, |_, x| c((-2.0 * x).exp()));
        let phi = a_theta_resolvent_apply(&cfg, 1.0, &psi).unwrap();
        let v = phi.edge(0)[0].re;
        // trapezoid error h²/12 · 3 / 2
        assert!((v - (1.0 / 3.0) / 2.0).abs() < 2e-5, "{v}");
    }

    #[test]
    fn correction_coefficient_on_exponential() {
        // ⟨e^{−x}, e^{−x}⟩/(θ + λ) = 0.25
        let cfg = one_edge(1.0);
        let psi = EdgeField::from_fn(&cfg, |_, x| c((-x).exp()));
        let phi = a_theta_resolvent_apply(&cfg, 1.0, &psi).unwrap();
        let d = dirichlet_convolve(cfg.grid(), 1.0, psi.edge(0));
        let coeff = phi.edge(0)[0] - d[0];
        assert!((coeff.re - 0.25).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(StarGraphConfig::new(CMatrix::from_element(1, 1, c(-1.0)), 0.01, 10.0).is_err());
        assert!(StarGraphConfig::new(CMatrix::from_element(1, 1, c(1.0)), 0.5, 5.0).is_err());
        let cfg = one_edge(1.0);
        let psi = EdgeField::from_fn(&cfg, |_, _| c(1.0));
        assert!(matches!(a_theta_resolvent_apply(&cfg, 1.0, &psi), Err(KreinError::GridTooCoarse(_))));
        assert!(matches!(a_theta_resolvent_apply(&cfg, -1.0, &psi), Err(KreinError::InadmissibleLambda { .. })));
    }
}
