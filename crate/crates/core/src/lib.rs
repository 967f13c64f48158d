//! Generic linear boundary-value problems
//!
//! ```text
//! y'(t) + A(t) y(t) = f(t),   a <= t <= b,
//! B y = q,
//! ```
//!
//! for `m`-vector functions in the Hölder space `C^{n+1,α}`, where `B` is any
//! continuous linear map into `C^m` (here: point values of derivatives at `a`
//! plus a Stieltjes integral of `y^{(n+1)}`). The crate solves single problems
//! through the matriciant and the matrix `[BY]`, and studies families
//! depending on a parameter `eps → 0+`: limit conditions on the data, the
//! condition on the limit problem, and the behaviour of solution errors
//! against problem discrepancies.

pub mod boundary;
pub mod bvp_solver;
pub mod corpus;
mod error;
pub mod funcspace;
pub mod holder;
pub mod ode_core;
pub mod param_family;
pub mod problem_file;
mod quadrature;

pub use error::{Error, Result};

/// Dense complex matrix used for all pointwise values.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
pub use num_complex::Complex64;

pub use boundary::{BoundaryOperator, Jump, StieltjesMeasure};
pub use bvp_solver::{is_wellposed, residual, solve, ProblemInstance, Residual, Solution, SolverOptions, WellPosedness};
pub use funcspace::{parse_expr, Expr, ExprMatrix, Grid, GridFunction, Interval, Var};
pub use holder::{holder_norm, holder_seminorm, sup_norm, HolderParams};
pub use ode_core::{lift_derivatives, matriciant, picard_matriciant, recover_coefficient, Matriciant};
pub use param_family::{ConvergenceReport, ProblemFamily};
pub use problem_file::{parse_problem, parse_problem_file, parse_problem_str, ProblemFile};
