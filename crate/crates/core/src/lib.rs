//! Nonlinear conjugate gradient methods for set optimization problems whose
//! objective is a finite family of vector functions ordered by a cone.
//!
//! Start with [`bench::builtin_problem`] or [`problem::SetValuedProblem::new`]
//! and hand the problem to [`cg::solve`].

// `!(a < b)` is used on purpose so that NaN counts as failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cg;
pub mod cli;
pub mod cone;
pub mod error;
pub mod linesearch;
pub mod minimal;
pub mod problem;
pub mod subproblem;

pub use error::{Error, Result};
