//! Problem files and step traces.

mod problem;
mod trace;

pub use problem::{parse_problem, ProblemSpec, Term};
pub use trace::{read_trace, write_trace, TraceRow, TraceSummary};
