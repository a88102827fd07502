//! Certified solver for polynomial initial-value problems y' = p(y) over the
//! rationals: every successful answer is within the requested accuracy of
//! the exact solution.

pub mod adaptive;
pub mod driver;
pub mod error;
pub mod io;
pub mod polyvec;
pub mod scalar;
pub mod taylor;
pub mod validation;

pub use adaptive::{
    derive_params, order_choice, solve_pivp_variable, solver_step, step_size, AbortReason, Diagnostics, RunRecord,
    SolveOutcome, SolverParams, StepRecord,
};
pub use driver::{solve_pivp_ex, DriverOutcome, HintPolicy};
pub use error::{Error, Result};
pub use io::{parse_problem, read_trace, write_trace, ProblemSpec};
pub use polyvec::{MultiIndex, Poly, PolyVec};
pub use scalar::{RVector, Rational};
pub use taylor::{compute_taylor, remainder_bound};
pub use validation::{oracle_value, ClosedForm};
