//! Workloads shared by the criterion benches.

use pivp_core::scalar::{int, pow2, ratio};
use pivp_core::{ClosedForm, Rational};

/// A benchmark problem solved to a horizon.
pub struct Workload {
    pub label: String,
    pub problem: ClosedForm,
    pub horizon: Rational,
}

/// Problems small enough to time repeatedly.
pub fn workloads() -> Vec<Workload> {
    let make = |problem: ClosedForm, horizon: Rational| Workload {
        label: format!("{problem}@{horizon}"),
        problem,
        horizon,
    };
    vec![
        make(ClosedForm::exp(), int(1)),
        make(ClosedForm::decay(), int(5)),
        make(ClosedForm::Spiking { m: int(4) }, int(1)),
        make(ClosedForm::Tower2, ratio(1, 2)),
        make(ClosedForm::Tan, int(1)),
    ]
}

/// Accuracy levels for the work-precision sweep.
pub fn accuracies() -> Vec<(u32, Rational)> {
    [10u32, 20, 30].into_iter().map(|k| (k, pow2(-(k as i64)))).collect()
}
