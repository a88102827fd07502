//! Exact-solution oracles, quadrature of the cost integrals and checks of
//! the auxiliary inequalities.

mod closed_form;
mod lemmas;
mod quadrature;

pub use closed_form::{oracle_value, ClosedForm};
pub use lemmas::{arithgeo_closed_form, arithgeo_recurrence, dependency_bound_check, DependencyCheck};
pub use quadrature::{estimate_int, estimate_len, integrate, state_norm, Estimate};
