//! Uniform cubic grids centred on the origin and brute-force convolution
//! with `G_λ`. Quadratic cost in the number of nodes, meant for coarse grids.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use super::{coupling_matrix, free_green, unit_cube_coulomb, PointConfig};
use crate::error::{KreinError, Result};
use crate::halfline::TAIL_TOLERANCE;
use crate::krein::SpectralParam;
use crate::linalg::{c, guarded_inverse, CVector};

/// `n³` nodes at `(i − (n−1)/2)·h` along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    n: usize,
    h: f64,
}

impl Grid3 {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n < 4 || !(h > 0.0) || !h.is_finite() {
            return Err(KreinError::InvalidInput(format!("3D grid needs n ≥ 4 and h > 0 (n = {n}, h = {h})")));
        }
        Ok(Grid3 { n, h })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n - 1) as f64 / 2.0) * self.h
    }

    /// Flat index, `x` fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n + j) * self.n + i
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let i = idx % self.n;
        let j = (idx / self.n) % self.n;
        let k = idx / (self.n * self.n);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|idx| f(self.point(idx))).collect()
    }
}

/// `∫_cell G_λ` for the cell centred on the singularity, to `O(h⁴)`.
pub fn center_cell_weight(lambda: f64, h: f64) -> f64 {
    h * h * (unit_cube_coulomb() - lambda * h) / (4.0 * PI)
}

/// Quadrature weight of `G_λ` over the cell at distance `r`.
fn cell_weight(lambda: f64, r: f64, h: f64) -> f64 {
    if r < 1e-9 * h {
        center_cell_weight(lambda, h)
    } else {
        h * h * h * free_green(lambda, r)
    }
}

fn tail_check(grid: &Grid3, psi: &[f64]) -> Result<()> {
    let n = grid.n;
    let peak = psi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut face = 0.0f64;
    for (idx, v) in psi.iter().enumerate() {
        let (i, j, k) = (idx % n, (idx / n) % n, idx / (n * n));
        if [i, j, k].iter().any(|&a| a == 0 || a == n - 1) {
            face = face.max(v.abs());
        }
    }
    if face > TAIL_TOLERANCE * peak {
        return Err(KreinError::GridTooCoarse(format!("field on the grid boundary is {face:.3e}, peak {peak:.3e}")));
    }
    Ok(())
}

/// Kernel weights indexed by `(|Δi|, |Δj|, |Δk|)`.
fn kernel_table(grid: &Grid3, lambda: f64) -> Vec<f64> {
    let n = grid.n;
    let h = grid.h;
    let mut t = vec![0.0; n * n * n];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let r = h * ((i * i + j * j + k * k) as f64).sqrt();
                t[(k * n + j) * n + i] = cell_weight(lambda, r, h);
            }
        }
    }
    t
}

fn convolve_one(grid: &Grid3, table: &[f64], psi: &[f64], target: usize) -> f64 {
    let n = grid.n;
    let (ti, tj, tk) = (target % n, (target / n) % n, target / (n * n));
    let mut sum = 0.0;
    for k in 0..n {
        let dk = k.abs_diff(tk);
        for j in 0..n {
            let row = (dk * n + j.abs_diff(tj)) * n;
            let base = (k * n + j) * n;
            for i in 0..n {
                sum += table[row + i.abs_diff(ti)] * psi[base + i];
            }
        }
    }
    sum
}

/// Riemann sum for `(G_λ * ψ)` at the listed node indices.
pub fn free_convolve_at(grid: &Grid3, lambda: f64, psi: &[f64], targets: &[usize]) -> Result<Vec<f64>> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(KreinError::InadmissibleLambda { lambda, reason: "kernel requires lambda ≥ 0" });
    }
    if psi.len() != grid.len() {
        return Err(KreinError::InvalidInput(format!("field has {} samples, grid {}", psi.len(), grid.len())));
    }
    tail_check(grid, psi)?;
    let table = kernel_table(grid, lambda);
    Ok(targets.iter().map(|&t| convolve_one(grid, &table, psi, t)).collect())
}

/// Riemann sum for `(G_λ * ψ)` at every node.
pub fn free_convolve(grid: &Grid3, lambda: f64, psi: &[f64]) -> Result<Vec<f64>> {
    let all: Vec<usize> = (0..grid.len()).collect();
    free_convolve_at(grid, lambda, psi, &all)
}

fn distance(a: [f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// `G_λ(x − y)` at a node; a node on the centre gets the cell average.
fn green_at_node(grid: &Grid3, lambda: f64, idx: usize, y: &[f64; 3]) -> f64 {
    cell_weight(lambda, distance(grid.point(idx), y), grid.h) / grid.h.powi(3)
}

/// `(−Δ_Θ + λ²)⁻¹ψ` on a grid: free convolution plus the rank-n correction
/// `(Θ + Θ_Y + λ/4π − M(λ))⁻¹_ij ⟨G_λ^i, ψ⟩ G_λ^j`.
pub fn grid_resolvent_apply(cfg: &PointConfig, lambda: f64, grid: &Grid3, psi: &[f64]) -> Result<Vec<Complex64>> {
    SpectralParam::positive(lambda)?;
    let free = free_convolve(grid, lambda, psi)?;
    let vol = grid.h.powi(3);
    let moments = CVector::from_fn(cfg.n(), |i, _| {
        let y = &cfg.centers()[i];
        c((0..grid.len()).map(|b| green_at_node(grid, lambda, b, y) * psi[b] * vol).sum())
    });
    let coeff = guarded_inverse(&coupling_matrix(cfg, lambda))? * moments;
    Ok((0..grid.len())
        .map(|a| {
            let corr: Complex64 =
                cfg.centers().iter().enumerate().map(|(j, y)| coeff[j] * green_at_node(grid, lambda, a, y)).sum();
            c(free[a]) + corr
        })
        .collect())
}
