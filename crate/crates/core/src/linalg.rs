//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{KreinError, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Condition numbers above this are treated as singular.
pub const COND_CAP: f64 = 1e12;

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn vec_max_abs(v: &CVector) -> f64 {
    max_abs(v.as_slice())
}

pub fn mat_max_abs(m: &CMatrix) -> f64 {
    max_abs(m.as_slice())
}

/// Max-entry difference of two matrices of equal shape.
pub fn mat_max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    mat_max_abs(&(a - b))
}

pub fn diag_real(d: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(d.len(), d.iter().map(|&x| c(x))))
}

pub fn condition_number(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let s = m.clone().svd(false, false).singular_values;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse with a condition-number guard.
pub fn guarded_inverse(m: &CMatrix) -> Result<CMatrix> {
    let cond = condition_number(m);
    if !(cond < COND_CAP) {
        return Err(KreinError::SingularGamma { cond });
    }
    m.clone().try_inverse().ok_or(KreinError::SingularGamma { cond })
}

/// Plain inverse for matrices known to be well conditioned (resolvents of skew
/// generators at real λ ≠ 0, Gram matrices).
pub fn inverse(m: &CMatrix) -> CMatrix {
    m.clone().try_inverse().expect("matrix expected to be invertible")
}

pub fn hermitian_part_residual(m: &CMatrix) -> f64 {
    mat_max_diff(m, &m.adjoint())
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> alloc::vec::Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5);
    let mut ev: alloc::vec::Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Principal square root of a Hermitian positive-definite matrix.
pub fn hermitian_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let h = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(h);
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(KreinError::NotPositiveDefinite("square root of a non-positive matrix"));
    }
    let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(l.sqrt())));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Adjoint of `a: (X, M_dom) -> (Y, M_cod)`, i.e. `M_dom⁻¹ aᴴ M_cod`.
pub fn gram_adjoint(a: &CMatrix, gram_dom: &CMatrix, gram_cod: &CMatrix) -> CMatrix {
    inverse(gram_dom) * a.adjoint() * gram_cod
}

/// Block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        off += b.nrows();
    }
    out
}

/// Orthonormal basis (columns) of the kernel of `a`, by SVD.
pub fn kernel_basis(a: &CMatrix, tol: f64) -> CMatrix {
    let n = a.ncols();
    // pad to square so the full right singular basis is available
    let mut sq = CMatrix::zeros(n.max(a.nrows()), n);
    sq.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: alloc::vec::Vec<CVector> = (0..vt.nrows())
        .filter(|&i| svd.singular_values[i] <= tol * smax.max(1.0))
        .map(|i| vt.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}
