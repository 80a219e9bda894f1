//! Scattering coefficients of `-u'' + (Q + λV) u = 0` as entire functions of the
//! coupling constant `λ`.
//!
//! The perturbation `V` is supported in `[0, 1]`. For a reference solution `u0`
//! of the unperturbed equation, `u_λ` agrees with `u0` left of the support and
//! `u_λ = a(λ) u0 + b(λ) v0` right of it. The crate computes `a` and `b` by
//! direct integration and by the Volterra power series, locates and counts the
//! zeros of `b`, fits its growth order, and links zeros of `b` to zero
//! eigenvalues of a self-adjoint operator on `[0, 1]`.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod ode;
mod poly;
pub mod potential;
pub mod problem;
mod quadrature;
pub mod scattering;
pub mod series;
pub mod spectral;
pub mod zeros;

pub use error::{Error, Result};
pub use ode::{apply_delta, Equation, Propagated, State, Tolerances, TransferMatrix};
pub use potential::{PotentialSpec, Segment, Spike};
pub use problem::{build_problem, v0_from_u0, wronskian, ReferenceData, ScatteringProblem};
pub use scattering::{coefficients, realify, reflection, Coefficients, Method, ReflectionResult};

pub use num_complex::Complex64;

/// `(u(0), u'(0))` through `(u(1+), u'(1+))` for `-u'' + (Q + λV) u = 0`.
pub fn propagate(problem: &ScatteringProblem, lambda: Complex64, init: State) -> Result<Propagated> {
    problem.equation().propagate(lambda, init)
}

pub fn transfer_matrix(problem: &ScatteringProblem, lambda: Complex64) -> Result<TransferMatrix> {
    problem.equation().transfer_matrix(lambda)
}
