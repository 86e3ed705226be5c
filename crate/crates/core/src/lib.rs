//! Krein-type resolvent formulas for singular perturbations of abstract wave
//! equations, with a finite-dimensional model and three concrete systems:
//! waves on a star graph, point interactions in R³ and a drifted point source.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the command line
//! runner live in the `kreinwave` crate.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod check;
pub mod driftwave;
pub mod error;
pub mod halfline;
pub mod krein;
pub mod linalg;
pub mod matrix_model;
pub mod pointwave3d;
pub mod quadrature;
pub mod sphere;
pub mod stargraph;

pub use error::{KreinError, Result};
pub use krein::{
    assemble_resolvent, cayley_step, gamma_difference_residual, resolvent_identity_residual, skew_adjointness_residual,
    Admissibility, Euclidean, GramMatrix, InnerProduct, KreinFamily, ResolventFamily, SpectralParam,
};
pub use linalg::{CMatrix, CVector};
