//! Simulation and bound verification for the viscous Burgers equation with
//! boundary and in-domain disturbances, and for a backstepping-stabilized
//! reaction-diffusion equation.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: grid, fields, norms, differences, quadrature, tridiagonal solves
//! - [`inequalities`]: De Giorgi level formula and functional-inequality checks
//! - [`burgers`]: IMEX solver and the two splitting decompositions
//! - [`backstepping`]: Volterra kernels, transforms and closed-loop simulation
//! - [`iss`]: bound evaluators and level-set diagnostics
//! - [`harness`]: scenario configs, runs, sweeps and CSV artifacts

// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod harness;
pub mod inequalities;
pub mod iss;
pub mod numerics;
pub mod random;
pub mod backstepping;
pub mod burgers;
mod stepper;

pub use error::{Error, Result};
pub use exec::Execution;
pub use numerics::{make_grid, Grid1D, Order, ScalarField, Trajectory};
