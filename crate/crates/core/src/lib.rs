//! Solvers for initial value problems of difference equations with
//! non-instantaneous impulses.
//!
//! - [`grid`]: the partitioned time horizon and grid functions.
//! - [`linear`]: the linear problem, solved by forward marching and by its
//!   explicit sum-of-products formula, plus the comparison-principle checks.
//! - [`monotone`]: lower/upper solutions and the monotone iteration that
//!   brackets the minimal and maximal solutions of a nonlinear problem.
//! - [`oracle`]: a direct nonlinear solver used as ground truth.
//! - [`expr`]: the expression language used by configuration files.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod grid;
pub mod linear;
pub mod monotone;
pub mod oracle;

/// Absolute slack for every pointwise inequality check.
pub const SLACK: f64 = 1e-12;

pub use grid::{sup_norm_diff, GridError, GridFunction, NodeKind, TimePartition};
pub use linear::{solve_closed_form, solve_forward, LinearError, LinearNIDE};
pub use monotone::{
    residual, run_monotone_iteration, sweep, IterationCoefficients, IterationOptions, IterationResult,
    IterationStatus, MonotoneError, NonlinearNIDE, Sector,
};
pub use oracle::{solve_nonlinear_direct, OracleError, RootOptions};
