//! Hint-doubling outer loop around the fixed-hint stepper.

use num_traits::Zero;

use crate::adaptive::{self, AbortReason, Diagnostics, RunRecord, SolveOutcome};
use crate::error::{Error, Result};
use crate::polyvec::PolyVec;
use crate::scalar::{self, RVector, Rational};

/// Hint schedule: attempt j uses `initial_hint · growth_factor^j`, j ≥ 1,
/// while that value does not exceed `max_hint`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HintPolicy {
    pub initial_hint: Rational,
    pub growth_factor: Rational,
    pub max_hint: Rational,
}

impl Default for HintPolicy {
    fn default() -> Self {
        HintPolicy {
            initial_hint: scalar::ratio(1, 2),
            growth_factor: scalar::int(2),
            max_hint: scalar::pow2(64),
        }
    }
}

impl HintPolicy {
    pub fn with_max_hint(max_hint: Rational) -> Self {
        HintPolicy {
            max_hint,
            ..HintPolicy::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_hint <= Rational::zero() {
            return Err(Error::Parameter(format!(
                "initial hint {} must be positive",
                self.initial_hint
            )));
        }
        if self.growth_factor < scalar::int(2) {
            return Err(Error::Parameter(format!(
                "growth factor {} must be at least 2",
                self.growth_factor
            )));
        }
        if self.max_hint < self.initial_hint {
            return Err(Error::Parameter(format!(
                "max hint {} is below the initial hint {}",
                self.max_hint, self.initial_hint
            )));
        }
        Ok(())
    }

    /// Hints in attempt order.
    pub fn schedule(&self) -> impl Iterator<Item = Rational> + '_ {
        let mut hint = self.initial_hint.clone();
        std::iter::from_fn(move || {
            hint = &hint * &self.growth_factor;
            (hint <= self.max_hint).then(|| hint.clone())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DriverOutcome {
    Success {
        value: RVector,
        run: RunRecord,
        final_hint: Rational,
        attempts: usize,
        hints_tried: Vec<Rational>,
    },
    /// No attempt up to the cap succeeded.
    HintExhausted {
        attempts: usize,
        last_hint: Option<Rational>,
        last_diagnostics: Option<Diagnostics>,
        hints_tried: Vec<Rational>,
    },
    /// The caller's interrupt check fired during an attempt.
    Interrupted {
        attempts: usize,
        hints_tried: Vec<Rational>,
    },
}

impl DriverOutcome {
    pub fn value(&self) -> Option<&RVector> {
        match self {
            DriverOutcome::Success { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn hints_tried(&self) -> &[Rational] {
        match self {
            DriverOutcome::Success { hints_tried, .. }
            | DriverOutcome::HintExhausted { hints_tried, .. }
            | DriverOutcome::Interrupted { hints_tried, .. } => hints_tried,
        }
    }
}

/// Approximates y(t) within `eps`, doubling the integral hint until a run
/// certifies itself or the cap is passed.
pub fn solve_pivp_ex(
    t0: &Rational,
    y0: &[Rational],
    p: &PolyVec,
    t: &Rational,
    eps: &Rational,
    policy: &HintPolicy,
) -> Result<DriverOutcome> {
    solve_pivp_ex_with(t0, y0, p, t, eps, policy, &mut || false)
}

pub fn solve_pivp_ex_with(
    t0: &Rational,
    y0: &[Rational],
    p: &PolyVec,
    t: &Rational,
    eps: &Rational,
    policy: &HintPolicy,
    interrupt: &mut dyn FnMut() -> bool,
) -> Result<DriverOutcome> {
    policy.validate()?;
    let mut hints_tried = Vec::new();
    let mut last_diagnostics = None;
    for hint in policy.schedule() {
        hints_tried.push(hint.clone());
        let outcome = adaptive::solve_pivp_variable_with(t0, y0, p, t, eps, &hint, interrupt)?;
        match outcome {
            SolveOutcome::Success { value, run } => {
                return Ok(DriverOutcome::Success {
                    value,
                    run,
                    final_hint: hint,
                    attempts: hints_tried.len(),
                    hints_tried,
                });
            }
            SolveOutcome::Abort {
                reason: AbortReason::Interrupted,
                ..
            } => {
                return Ok(DriverOutcome::Interrupted {
                    attempts: hints_tried.len(),
                    hints_tried,
                });
            }
            SolveOutcome::Abort { run, .. } => last_diagnostics = Some(run.diagnostics),
        }
    }
    Ok(DriverOutcome::HintExhausted {
        attempts: hints_tried.len(),
        last_hint: hints_tried.last().cloned(),
        last_diagnostics,
        hints_tried,
    })
}

/// `initial · factor^attempts`, the hint a successful run must report.
pub fn expected_hint(policy: &HintPolicy, attempts: usize) -> Rational {
    let mut h = policy.initial_hint.clone();
    for _ in 0..attempts {
        h *= &policy.growth_factor;
    }
    h
}
