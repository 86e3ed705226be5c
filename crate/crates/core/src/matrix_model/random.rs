//! Seeded random models.
//!
//! `C₁`, `C₂` are built as `i·p_j(B) + a_j·K` with one skew-Hermitian `K`
//! that is block diagonal on the eigenspaces of `B`, so all commutation
//! relations hold exactly.

use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, diag_real, CMatrix, CVector};

use super::MatrixModel;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub(crate) fn random_cvector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    CVector::from_iterator(n, (0..n).map(|_| random_complex(rng)))
}

pub(crate) fn random_cmatrix<R: Rng>(rng: &mut R, r: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(r, cols, |_, _| random_complex(rng))
}

fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

impl MatrixModel {
    /// Deterministic random model with `n` states and `m` charges.
    /// With `drift = false` the model has `C₁ = C₂ = 0`.
    pub fn random(seed: u64, n: usize, m: usize, drift: bool) -> crate::Result<Self> {
        if n == 0 || m == 0 || m > n {
            return Err(crate::error::invalid("need 1 <= m <= N"));
        }
        let mut rng = rng(seed);

        // eigenvalue blocks of size 1 or 2
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        while start < n {
            let size = if n - start >= 2 && rng.random_bool(0.5) { 2 } else { 1 };
            blocks.push((start, size));
            start += size;
        }
        let mut b = alloc::vec![0.0; n];
        let mut k = CMatrix::zeros(n, n);
        for &(s, size) in &blocks {
            let beta = rng.random_range(0.5..2.0);
            for i in 0..size {
                b[s + i] = beta;
            }
            let x = random_cmatrix(&mut rng, size, size);
            let skew = (&x - x.adjoint()) * c(0.5);
            k.view_mut((s, s), (size, size)).copy_from(&skew);
        }

        let (c1, c2) = if drift {
            let bm = diag_real(&b);
            let b2 = &bm * &bm;
            let binv = diag_real(&b.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
            let make = |rng: &mut ChaCha8Rng| {
                let p1 = rng.random_range(-1.0..1.0);
                let p2 = rng.random_range(-0.3..0.3);
                let a = rng.random_range(-1.0..1.0);
                let raw = (&bm * c(p1) + &b2 * c(p2)) * Complex64::i() + &k * c(a);
                let target = rng.random_range(0.2..0.8);
                let norm = spectral_norm(&(&raw * &binv));
                if norm > 0.0 {
                    raw * c(target / norm)
                } else {
                    raw
                }
            };
            let c1 = make(&mut rng);
            let c2 = make(&mut rng);
            (c1, c2)
        } else {
            (CMatrix::zeros(n, n), CMatrix::zeros(n, n))
        };

        let tau = loop {
            let t = random_cmatrix(&mut rng, m, n);
            let s = t.clone().svd(false, false).singular_values;
            if s.iter().cloned().fold(f64::INFINITY, f64::min) > 0.1 {
                break t;
            }
        };
        let x = random_cmatrix(&mut rng, m, m);
        let theta = (&x * x.adjoint()) * c(1.0 / m as f64) + CMatrix::identity(m, m) * c(0.5);
        let theta = (&theta + theta.adjoint()) * c(0.5);

        MatrixModel::new(b, c1, c2, tau, theta)
    }
}
