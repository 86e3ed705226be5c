//! Uniform grids on a truncated half-line and the kernels, stencils and
//! discrete wave systems built on them. Shared by the star graph and the
//! radial point-interaction code.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{KreinError, Result};
use crate::krein::SpectralParam;
use crate::linalg::{c, guarded_inverse, CMatrix, CVector};
use num_complex::Complex64;

/// `λL` below this leaves more than `e⁻¹⁸` of the kernels outside the grid.
pub const MIN_DECAY_LENGTH: f64 = 18.0;
/// Relative size allowed for a field in the last 5% of the grid.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Nodes `x_i = i·h`, `i = 0..nodes`, on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineGrid {
    h: f64,
    nodes: usize,
}

impl HalfLineGrid {
    /// `len` is rounded to a whole number of cells; at least 20 are required.
    pub fn new(h: f64, len: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || !len.is_finite() {
            return Err(KreinError::InvalidInput(format!("grid needs h > 0 and finite L (h = {h}, L = {len})")));
        }
        let cells = (len / h).round();
        if cells < 20.0 {
            return Err(KreinError::GridTooCoarse(format!("L = {len} is shorter than 20 cells of h = {h}")));
        }
        Ok(HalfLineGrid { h, nodes: cells as usize + 1 })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn len(&self) -> f64 {
        self.h * (self.nodes - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.h * i as f64
    }

    pub fn weights(&self) -> Vec<f64> {
        crate::quadrature::trapezoid_weights(self.nodes, self.h)
    }

    pub fn sample(&self, mut f: impl FnMut(f64) -> Complex64) -> Vec<Complex64> {
        (0..self.nodes).map(|i| f(self.x(i))).collect()
    }
}

/// `(e^{−λ|x−y|} − e^{−λ(x+y)})/(2λ)`, the Dirichlet Green function of `−d²/dx² + λ²`.
pub fn dirichlet_green(lambda: f64, x: f64, y: f64) -> f64 {
    ((-lambda * (x - y).abs()).exp() - (-lambda * (x + y)).exp()) / (2.0 * lambda)
}

/// Rejects kernels that have not decayed by `L` and fields with a tail.
pub fn decay_check(grid: &HalfLineGrid, lambda: f64, fields: &[&[Complex64]]) -> Result<()> {
    if lambda * grid.len() < MIN_DECAY_LENGTH {
        return Err(KreinError::GridTooCoarse(format!(
            "λL = {:.3} < {MIN_DECAY_LENGTH}: kernel not decayed within the grid",
            lambda * grid.len()
        )));
    }
    let start = grid.nodes - (grid.nodes / 20).max(1);
    for f in fields {
        let peak = f.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let tail = f[start..].iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if tail > TAIL_TOLERANCE * peak {
            return Err(KreinError::GridTooCoarse(format!(
                "field tail {tail:.3e} exceeds {TAIL_TOLERANCE:e} of its peak"
            )));
        }
    }
    Ok(())
}

/// Trapezoid rule for `∫₀^L G_D(λ; x_i, y) f(y) dy` at every node, in O(nodes).
///
/// Split into the `e^{−λ(x−y)}` sum from the left, the `e^{−λ(y−x)}` sum from
/// the right and the image term. All recurrence factors are below one.
pub fn dirichlet_convolve(grid: &HalfLineGrid, lambda: f64, f: &[Complex64]) -> Vec<Complex64> {
    let n = grid.nodes;
    let w = grid.weights();
    let q = (-lambda * grid.h).exp();
    let mut left = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        acc = acc * q + f[i] * w[i];
        left[i] = acc;
    }
    let mut right = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = Complex64::new(0.0, 0.0);
    for i in (0..n - 1).rev() {
        acc = (acc + f[i + 1] * w[i + 1]) * q;
        right[i] = acc;
    }
    let image = exp_moment(grid, lambda, f);
    (0..n).map(|i| (left[i] + right[i] - image * (-lambda * grid.x(i)).exp()) / (2.0 * lambda)).collect()
}

/// `∫₀^L e^{−λy} f(y) dy` by the trapezoid rule.
pub fn exp_moment(grid: &HalfLineGrid, lambda: f64, f: &[Complex64]) -> Complex64 {
    let w = grid.weights();
    let mut sum = Complex64::new(0.0, 0.0);
    for i in (0..grid.nodes).rev() {
        sum += f[i] * (w[i] * (-lambda * grid.x(i)).exp());
    }
    sum
}

/// `∫ conj(f) g` by the trapezoid rule.
pub fn inner(grid: &HalfLineGrid, f: &[Complex64], g: &[Complex64]) -> Complex64 {
    grid.weights().iter().zip(f.iter().zip(g)).map(|(w, (a, b))| a.conj() * b * *w).sum()
}

/// `(f_{i−1} − 2f_i + f_{i+1})/h²` at an interior node.
pub fn second_difference(f: &[Complex64], h: f64, i: usize) -> Complex64 {
    (f[i - 1] - f[i] * 2.0 + f[i + 1]) / (h * h)
}

/// Second-order one-sided derivative at node 0.
pub fn one_sided_derivative(f: &[Complex64], h: f64) -> Complex64 {
    (-f[0] * 3.0 + f[1] * 4.0 - f[2]) / (2.0 * h)
}

/// P1 elements with lumped mass on `n` copies of the grid, Dirichlet at `x = L`
/// and the coupling `φ′(0) = Θφ(0)` between the `n` values at `x = 0`.
///
/// The semi-discrete wave equation `φ̇ = ψ`, `Mψ̇ = −Kφ` is skew in the energy
/// `φᴴKφ + ψᴴMψ`, so its Cayley steps conserve that energy exactly.
#[derive(Debug, Clone)]
pub struct RobinWaveSystem {
    grid: HalfLineGrid,
    theta: CMatrix,
}

impl RobinWaveSystem {
    pub fn new(grid: HalfLineGrid, theta: CMatrix) -> Self {
        RobinWaveSystem { grid, theta }
    }

    pub fn edges(&self) -> usize {
        self.theta.nrows()
    }

    pub fn grid(&self) -> &HalfLineGrid {
        &self.grid
    }

    /// Length of the flattened state `[φ edge by edge, ψ edge by edge]`.
    pub fn state_len(&self) -> usize {
        2 * self.edges() * self.grid.nodes
    }

    /// `(−W + λ)⁻¹(f, g)`: solves `(K + λ²M)φ = M(g + λf)` and sets `ψ = λφ − f`.
    pub fn resolve(&self, lambda: SpectralParam, x: &CVector) -> Result<CVector> {
        let (n, nodes) = (self.edges(), self.grid.nodes);
        let l = lambda.value();
        let h = self.grid.h;
        let w = self.grid.weights();
        let unknowns = nodes - 1;
        // rows of K + λ²M on nodes 0..nodes−1; off-diagonals are all −1/h
        let diag: Vec<f64> = (0..unknowns).map(|i| if i == 0 { 1.0 / h } else { 2.0 / h } + l * l * w[i]).collect();
        let off = -1.0 / h;
        let mut cp = vec![0.0; unknowns];
        let mut denom = vec![0.0; unknowns];
        for i in 0..unknowns {
            denom[i] = diag[i] - if i > 0 { off * cp[i - 1] } else { 0.0 };
            if denom[i] == 0.0 {
                return Err(KreinError::InadmissibleLambda { lambda: l, reason: "singular discrete system" });
            }
            cp[i] = off / denom[i];
        }
        let thomas = |rhs: &mut [Complex64]| {
            for i in 0..unknowns {
                let prev = if i > 0 { rhs[i - 1] * off } else { Complex64::new(0.0, 0.0) };
                rhs[i] = (rhs[i] - prev) / denom[i];
            }
            for i in (0..unknowns - 1).rev() {
                let next = rhs[i + 1] * cp[i];
                rhs[i] -= next;
            }
        };
        let mut z = vec![Complex64::new(0.0, 0.0); unknowns];
        z[0] = c(1.0);
        thomas(&mut z);
        let mut y: Vec<Vec<Complex64>> = (0..n)
            .map(|k| {
                let mut r: Vec<Complex64> =
                    (0..unknowns).map(|i| (x[(n + k) * nodes + i] + x[k * nodes + i] * l) * w[i]).collect();
                thomas(&mut r);
                r
            })
            .collect();
        let schur = CMatrix::identity(n, n) + &self.theta * z[0];
        let a = guarded_inverse(&schur)? * CVector::from_fn(n, |k, _| y[k][0]);
        let ta = &self.theta * a;
        let mut out = CVector::zeros(2 * n * nodes);
        for k in 0..n {
            for i in 0..unknowns {
                y[k][i] -= z[i] * ta[k];
                out[k * nodes + i] = y[k][i];
            }
            for i in 0..nodes {
                out[(n + k) * nodes + i] = out[k * nodes + i] * l - x[k * nodes + i];
            }
        }
        Ok(out)
    }

    /// `φᴴKφ + ψᴴMψ`.
    pub fn energy(&self, x: &CVector) -> f64 {
        let (n, nodes) = (self.edges(), self.grid.nodes);
        let h = self.grid.h;
        let w = self.grid.weights();
        let mut e = 0.0;
        let mut a = CVector::zeros(n);
        for k in 0..n {
            let phi = &x.as_slice()[k * nodes..(k + 1) * nodes];
            let psi = &x.as_slice()[(n + k) * nodes..(n + k + 1) * nodes];
            a[k] = phi[0];
            for i in 0..nodes - 1 {
                e += (phi[i + 1] - phi[i]).norm_sqr() / h;
            }
            for i in 0..nodes {
                e += w[i] * psi[i].norm_sqr();
            }
        }
        e + a.dotc(&(&self.theta * &a)).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_function_values() {
        assert_eq!(dirichlet_green(1.0, 0.0, 2.0), 0.0);
        assert!((dirichlet_green(1.0, 1.0, 1.0) - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
        assert_eq!(dirichlet_green(0.7, 1.3, 0.4), dirichlet_green(0.7, 0.4, 1.3));
        assert!(dirichlet_green(0.7, 1.3, 0.4) > 0.0);
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let grid = HalfLineGrid::new(0.05, 3.0).unwrap();
        let f = grid.sample(|x| Complex64::new((x * 1.7).sin(), x * x));
        let fast = dirichlet_convolve(&grid, 1.3, &f);
        let w = grid.weights();
        for (i, got) in fast.iter().enumerate() {
            let direct: Complex64 =
                (0..grid.nodes()).map(|j| f[j] * (w[j] * dirichlet_green(1.3, grid.x(i), grid.x(j)))).sum();
            assert!((got - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn grid_rejects_short_domains() {
        assert!(matches!(HalfLineGrid::new(0.1, 1.0), Err(KreinError::GridTooCoarse(_))));
        assert!(HalfLineGrid::new(-0.1, 10.0).is_err());
        let g = HalfLineGrid::new(0.1, 2.0).unwrap();
        assert_eq!(g.nodes(), 21);
    }

    #[test]
    fn robin_solve_inverts_the_operator() {
        let grid = HalfLineGrid::new(0.1, 3.0).unwrap();
        let theta = CMatrix::from_row_slice(2, 2, &[c(2.0), c(0.5), c(0.5), c(1.0)]);
        let sys = RobinWaveSystem::new(grid, theta.clone());
        let nodes = grid.nodes();
        let mut x = CVector::from_fn(sys.state_len(), |i, _| Complex64::new((i as f64).cos(), 0.3));
        for k in 0..4 {
            x[k * nodes + nodes - 1] = c(0.0);
        }
        let l = 1.7;
        let out = sys.resolve(SpectralParam::new(l).unwrap(), &x).unwrap();
        // (K + λ²M)φ = M(g + λf) row by row
        let w = grid.weights();
        let h = grid.h();
        for k in 0..2 {
            let phi = &out.as_slice()[k * nodes..(k + 1) * nodes];
            assert_eq!(phi[nodes - 1], c(0.0));
            for i in 0..nodes - 1 {
                let mut lhs = phi[i] * (l * l * w[i]);
                lhs += if i == 0 { (phi[0] - phi[1]) / h } else { (phi[i] * 2.0 - phi[i - 1] - phi[i + 1]) / h };
                if i == 0 {
                    lhs += theta[(k, 0)] * out[0] + theta[(k, 1)] * out[nodes];
                }
                let rhs = (x[(2 + k) * nodes + i] + x[k * nodes + i] * l) * w[i];
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }
}
