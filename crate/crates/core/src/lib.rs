//! Exact and numerical linear algebra for symplectic instanton monads on
//! projective 3-space.
//!
//! An instanton of charge `k` is encoded by a tensor `A` in
//! `C4* (x) Ck* (x) C(2k+2)`; everything in this crate (the monad
//! conditions, tangent dimensions, the obstruction map `xi`, unstable
//! planes, and the classification of obstruction directions `S`) is
//! computed from `A` by finite linear algebra.

#![no_std]

extern crate alloc;

pub mod audit;
pub mod linalg;
pub mod monad;
pub mod pencil;
pub mod planes;
pub mod rng;
pub mod scalar;
pub mod tensors;

use alloc::string::String;

pub use linalg::{AffineSolution, Backend, Matrix};
pub use scalar::{ExactField, Fp, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrices do not commute (commutator norm {norm:e})")]
    NonCommuting { norm: f64 },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("no convergence (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("charge k = {0} outside the supported range")]
    InvalidCharge(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
