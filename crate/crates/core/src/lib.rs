//! 1D nonlinear-acoustics solver laboratory.
//!
//! Solves the Westervelt, Kuznetsov and Jordan–Moore–Gibson–Thompson (JMGT)
//! wave equations in acoustic-velocity-potential form on a channel with
//! homogeneous Dirichlet boundaries, using a C¹ B-spline Galerkin
//! discretization in space and Newmark time stepping (second order for the
//! classical models, a third-order extension for JMGT). Ships with energy
//! and norm diagnostics, semi-analytic verification oracles, and a τ → 0
//! singular-limit sweep driver.

// validators use negated comparisons so that NaN inputs fail them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod banded;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod models;
pub mod newmark;
pub mod oracles;
pub mod spline;

pub use error::{Error, Result};
