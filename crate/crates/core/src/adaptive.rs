//! Variable-step, variable-order certified stepper with a fixed integral hint.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::polyvec::PolyVec;
use crate::scalar::{self, RVector, Rational, EXP_GUARD_BITS};
use crate::taylor::{self, TaylorEngine};

/// Quantities fixed for a whole run by the system, accuracy and hint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverParams {
    /// max(2, deg p)
    pub degree_bound: u32,
    /// Requested accuracy clamped to at most 1/(4k).
    pub accuracy: Rational,
    /// Upper bound on every normalized step.
    pub step_fraction: Rational,
    /// Exact rational step cap; the loop aborts once the step index reaches it.
    pub step_limit: Rational,
    /// Rational under-approximation of accuracy·e^{-hint}.
    pub global_budget: Rational,
    /// Per-step rounding budget.
    pub rounding_budget: Rational,
    pub hint: Rational,
    /// Output grid exponent of every Taylor evaluation.
    pub rounding_bits: i64,
}

pub fn derive_params(p: &PolyVec, eps: &Rational, hint: &Rational) -> Result<SolverParams> {
    if !eps.is_positive() {
        return Err(Error::Parameter(format!("accuracy {eps} must be positive")));
    }
    if !hint.is_positive() {
        return Err(Error::Parameter(format!("hint {hint} must be positive")));
    }
    let k = p.degree().max(2);
    let kq = scalar::int(k as i64);
    let cap = Rational::one() / (scalar::int(4) * &kq);
    let accuracy = if *eps < cap { eps.clone() } else { cap };
    let one = Rational::one();
    let step_fraction = &one - &kq / (&one - scalar::int(2) * &kq * &accuracy + &kq);
    let step_limit = &one + scalar::int(2) * hint / &step_fraction;
    let global_budget = &accuracy / scalar::exp_upper(hint, EXP_GUARD_BITS);
    let rounding_budget = &global_budget / (scalar::int(3) * &step_limit);
    let rounding_bits = taylor::rounding_precision(&rounding_budget)?;
    Ok(SolverParams {
        degree_bound: k,
        accuracy,
        step_fraction,
        step_limit,
        global_budget,
        rounding_budget,
        hint: hint.clone(),
        rounding_bits,
    })
}

/// k·σ·max(1, ‖y‖)^{k−1}: the growth rate that normalizes a step.
fn growth_rate(params: &SolverParams, sigma: &Rational, y_norm: &Rational) -> Rational {
    let k = params.degree_bound;
    let y = scalar::max_one(y_norm);
    let mut rate = scalar::mul(&scalar::int(k as i64), sigma);
    for _ in 1..k {
        rate = scalar::mul(&rate, &y);
    }
    rate
}

pub fn step_size(params: &SolverParams, sigma: &Rational, y_norm: &Rational, remaining: &Rational) -> Rational {
    let rate = growth_rate(params, sigma, y_norm);
    if rate.is_zero() {
        return remaining.clone();
    }
    let cap = &params.step_fraction / rate;
    if cap < *remaining {
        cap
    } else {
        remaining.clone()
    }
}

/// Step taken by the solver: the length-limited step from [`step_size`],
/// rounded down to a dyadic with `STEP_BITS` significant bits unless it
/// reaches `remaining`. Keeps the running time exact and short.
pub fn solver_step(params: &SolverParams, sigma: &Rational, y_norm: &Rational, remaining: &Rational) -> Rational {
    let rate = growth_rate(params, sigma, y_norm);
    if rate.is_zero() {
        return remaining.clone();
    }
    let lambda = &params.step_fraction;
    let cap = Rational::new_raw(lambda.numer() * rate.denom(), lambda.denom() * rate.numer());
    let cap = scalar::floor_dyadic(&cap, STEP_BITS);
    if cap < *remaining {
        cap
    } else {
        remaining.clone()
    }
}

pub const STEP_BITS: u32 = 64;

/// Number of Taylor terms for a step from a state of norm `y_norm`.
pub fn order_choice(params: &SolverParams, y_norm: &Rational) -> usize {
    let (g, n, y) = (&params.global_budget, &params.step_limit, scalar::max_one(y_norm));
    let arg = Rational::new_raw(
        g.numer() * n.denom() * y.denom(),
        g.denom() * n.numer() * y.numer() * BigInt::from(6),
    );
    let bits = scalar::ceil_neg_log2(&arg).expect("argument is positive");
    bits.max(1) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub index: usize,
    pub t_start: Rational,
    pub delta_t: Rational,
    /// Normalized step length.
    pub beta: Rational,
    pub omega: usize,
    pub y_after: RVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Diagnostics {
    pub steps: usize,
    pub sum_beta: Rational,
    pub max_rsize: u64,
    pub taylor_calls: usize,
    pub arith_ops: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub params: SolverParams,
    pub trace: Vec<StepRecord>,
    pub diagnostics: Diagnostics,
}

impl RunRecord {
    /// Time reached by the last step, or `t0` for an empty trace.
    pub fn final_time(&self, t0: &Rational) -> Rational {
        self.trace
            .last()
            .map(|s| &s.t_start + &s.delta_t)
            .unwrap_or_else(|| t0.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortReason {
    TooManySteps,
    UnsafeResult,
    /// Stopped by the caller's interrupt check.
    Interrupted,
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AbortReason::TooManySteps => "too many steps",
            AbortReason::UnsafeResult => "unsafe result",
            AbortReason::Interrupted => "interrupted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Success { value: RVector, run: RunRecord },
    Abort { reason: AbortReason, run: RunRecord },
}

impl SolveOutcome {
    pub fn run(&self) -> &RunRecord {
        match self {
            SolveOutcome::Success { run, .. } | SolveOutcome::Abort { run, .. } => run,
        }
    }

    pub fn value(&self) -> Option<&RVector> {
        match self {
            SolveOutcome::Success { value, .. } => Some(value),
            SolveOutcome::Abort { .. } => None,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, SolveOutcome::Success { .. })
    }
}

/// Approximates y(t) for y' = p(y), y(t0) = y0 within `eps`, or aborts
/// when the hint is too small to certify the result.
pub fn solve_pivp_variable(
    t0: &Rational,
    y0: &[Rational],
    p: &PolyVec,
    t: &Rational,
    eps: &Rational,
    hint: &Rational,
) -> Result<SolveOutcome> {
    solve_pivp_variable_with(t0, y0, p, t, eps, hint, &mut || false)
}

/// As [`solve_pivp_variable`], polling `interrupt` before every step.
pub fn solve_pivp_variable_with(
    t0: &Rational,
    y0: &[Rational],
    p: &PolyVec,
    t: &Rational,
    eps: &Rational,
    hint: &Rational,
    interrupt: &mut dyn FnMut() -> bool,
) -> Result<SolveOutcome> {
    if y0.len() != p.dim() {
        return Err(Error::dimension("initial condition", p.dim(), y0.len()));
    }
    if t < t0 {
        return Err(Error::Parameter(format!("end time {t} is before start time {t0}")));
    }
    let params = derive_params(p, eps, hint)?;
    let engine = TaylorEngine::new(p);
    let sigma = p.sigma();

    let mut u = t0.clone();
    let mut y: RVector = y0.to_vec();
    let mut trace = Vec::new();
    let mut diag = Diagnostics {
        max_rsize: y.iter().map(scalar::rsize).max().unwrap_or(0),
        ..Diagnostics::default()
    };
    let finish = |trace: Vec<StepRecord>, mut diag: Diagnostics, params: SolverParams| {
        diag.steps = trace.len();
        RunRecord {
            params,
            trace,
            diagnostics: diag,
        }
    };

    let mut i: usize = 0;
    while u < *t {
        if scalar::int(i as i64) >= params.step_limit {
            let run = finish(trace, diag, params);
            return Ok(SolveOutcome::Abort {
                reason: AbortReason::TooManySteps,
                run,
            });
        }
        if interrupt() {
            let run = finish(trace, diag, params);
            return Ok(SolveOutcome::Abort {
                reason: AbortReason::Interrupted,
                run,
            });
        }
        let y_norm = scalar::infnorm(&y)?;
        let delta = solver_step(&params, &sigma, &y_norm, &(t - &u));
        let beta = scalar::mul(&growth_rate(&params, &sigma, &y_norm), &delta);
        let omega = order_choice(&params, &y_norm);
        y = engine.evaluate(&y, omega, &params.rounding_budget, &delta, &mut diag.arith_ops)?;
        diag.arith_ops += 8;
        diag.taylor_calls += 1;
        diag.max_rsize = diag.max_rsize.max(y.iter().map(scalar::rsize).max().unwrap_or(0));
        diag.sum_beta = scalar::add(&diag.sum_beta, &beta);
        trace.push(StepRecord {
            index: i,
            t_start: u.clone(),
            delta_t: delta.clone(),
            beta: beta.clone(),
            omega,
            y_after: y.clone(),
        });
        u = scalar::add(&u, &delta);
        i += 1;
        // I < 3((i−1)λ + β), with β kept on one side to avoid a big gcd
        let slack = &params.hint / scalar::int(3) - scalar::int(i as i64 - 1) * &params.step_fraction;
        if slack < beta {
            let run = finish(trace, diag, params);
            return Ok(SolveOutcome::Abort {
                reason: AbortReason::UnsafeResult,
                run,
            });
        }
    }
    let run = finish(trace, diag, params);
    Ok(SolveOutcome::Success { value: y, run })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyvec::{MultiIndex, Poly};
    use crate::scalar::{int, pow2, ratio};

    fn linear(rate: i64) -> PolyVec {
        let mut c = Poly::zero(1);
        c.add_term(MultiIndex::unit(1, 0), int(rate)).unwrap();
        PolyVec::new(vec![c]).unwrap()
    }

    fn tan_system() -> PolyVec {
        let mut c = Poly::constant(1, int(1));
        c.add_term(MultiIndex::new(vec![2]), int(1)).unwrap();
        PolyVec::new(vec![c]).unwrap()
    }

    #[test]
    fn params_for_linear_system() {
        let p = derive_params(&linear(1), &int(1), &int(1)).unwrap();
        assert_eq!(p.degree_bound, 2);
        assert_eq!(p.accuracy, ratio(1, 8));
        assert_eq!(p.step_fraction, ratio(1, 5));
        assert_eq!(p.step_limit, int(11));
        assert_eq!(p.rounding_budget, &p.global_budget / int(33));
    }

    #[test]
    fn params_reject_nonpositive_inputs() {
        assert!(derive_params(&linear(1), &int(0), &int(1)).is_err());
        assert!(derive_params(&linear(1), &int(1), &ratio(-1, 2)).is_err());
    }

    #[test]
    fn global_budget_brackets_exponential() {
        for hint in [ratio(1, 2), int(1), int(7), int(64)] {
            let p = derive_params(&linear(1), &pow2(-10), &hint).unwrap();
            let (lo, hi) = scalar::exp_enclosure(&-&hint, 48);
            assert!(p.global_budget <= &p.accuracy * &hi);
            let slack = Rational::one() + pow2(-32);
            assert!(&p.global_budget * &slack >= &p.accuracy * &lo);
        }
    }

    #[test]
    fn step_fraction_stays_below_one_third() {
        for e in 3..60 {
            let p = derive_params(&linear(1), &pow2(-e), &int(1)).unwrap();
            assert!(p.step_fraction < ratio(1, 3));
            assert!(p.step_fraction.is_positive());
        }
        for deg in 2..6u32 {
            let mut c = Poly::zero(1);
            c.add_term(MultiIndex::new(vec![deg]), int(1)).unwrap();
            let p = derive_params(&PolyVec::new(vec![c]).unwrap(), &int(1), &int(3)).unwrap();
            assert!(p.step_fraction <= ratio(1, 2));
        }
    }

    #[test]
    fn step_size_examples() {
        let params = derive_params(&linear(1), &int(1), &int(1)).unwrap();
        assert_eq!(step_size(&params, &int(1), &int(3), &int(10)), ratio(1, 30));
        assert_eq!(step_size(&params, &int(1), &int(3), &ratio(1, 100)), ratio(1, 100));
        assert_eq!(step_size(&params, &int(1), &ratio(1, 2), &int(10)), ratio(1, 10));
        assert_eq!(step_size(&params, &int(0), &int(3), &int(10)), int(10));
        let d = solver_step(&params, &int(1), &int(3), &int(10));
        assert!(d <= ratio(1, 30) && ratio(1, 30) - &d < scalar::pow2(-68));
        assert!(d.denom().bits() <= 69);
        assert_eq!(solver_step(&params, &int(1), &int(3), &ratio(1, 100)), ratio(1, 100));
    }

    #[test]
    fn order_choice_examples() {
        let mut params = derive_params(&linear(1), &int(1), &int(1)).unwrap();
        params.global_budget = ratio(1, 100);
        assert_eq!(params.step_limit, int(11));
        assert_eq!(order_choice(&params, &int(2)), 14);

        params.global_budget = &int(6) * &params.step_limit / int(1024);
        assert_eq!(order_choice(&params, &ratio(1, 3)), 10);

        params.global_budget = int(1_000_000);
        assert_eq!(order_choice(&params, &int(1)), 1);
    }

    fn check_run(t0: &Rational, y0: &[Rational], p: &PolyVec, t: &Rational, run: &RunRecord) {
        let params = &run.params;
        let sigma = p.sigma();
        let mut y = y0.to_vec();
        for s in &run.trace {
            let norm = scalar::infnorm(&y).unwrap();
            assert_eq!(s.delta_t, solver_step(params, &sigma, &norm, &(t - &s.t_start)));
            assert_eq!(s.beta, growth_rate(params, &sigma, &norm) * &s.delta_t);
            assert_eq!(s.omega, order_choice(params, &norm));
            y = s.y_after.clone();
        }
        let mut u = t0.clone();
        let mut sum = Rational::zero();
        assert!(int(run.trace.len() as i64) <= params.step_limit);
        for (i, s) in run.trace.iter().enumerate() {
            assert_eq!(s.index, i);
            assert_eq!(s.t_start, u);
            assert!(s.delta_t.is_positive());
            assert!(s.beta <= params.step_fraction);
            u += &s.delta_t;
            sum += &s.beta;
        }
        assert_eq!(run.final_time(t0), u);
        assert_eq!(run.diagnostics.sum_beta, sum);
        assert_eq!(run.diagnostics.steps, run.trace.len());
    }

    #[test]
    fn exponential_to_one() {
        let p = linear(1);
        let out = solve_pivp_variable(&int(0), &[int(1)], &p, &int(1), &pow2(-10), &int(32)).unwrap();
        let SolveOutcome::Success { value, run } = &out else {
            panic!("expected success, got {out:?}");
        };
        let (lo, hi) = scalar::exp_enclosure(&int(1), 64);
        let e = (lo + hi) / int(2);
        assert!((&value[0] - e).abs() <= pow2(-10));
        assert_eq!(run.final_time(&int(0)), int(1));
        check_run(&int(0), &[int(1)], &p, &int(1), run);
        let last = run.trace.last().unwrap();
        let n = run.trace.len() as i64;
        assert!(
            run.params.hint >= int(3) * (int(n - 1) * &run.params.step_fraction + &last.beta)
        );
    }

    #[test]
    fn small_hint_aborts() {
        let p = linear(1);
        let out = solve_pivp_variable(&int(0), &[int(1)], &p, &int(5), &pow2(-10), &int(1)).unwrap();
        let SolveOutcome::Abort { run, .. } = &out else {
            panic!("expected abort");
        };
        check_run(&int(0), &[int(1)], &p, &int(5), run);
    }

    #[test]
    fn zero_length_interval_returns_initial_state() {
        let y0 = vec![ratio(1, 3), ratio(-2, 7)];
        let p = PolyVec::new(vec![Poly::var(2, 1), Poly::var(2, 0)]).unwrap();
        let out = solve_pivp_variable(&ratio(1, 2), &y0, &p, &ratio(1, 2), &pow2(-10), &int(1)).unwrap();
        let SolveOutcome::Success { value, run } = out else {
            panic!("expected success");
        };
        assert_eq!(value, y0);
        assert!(run.trace.is_empty());
        assert_eq!(run.diagnostics.steps, 0);
    }

    #[test]
    fn zero_system_keeps_state() {
        let y0 = vec![ratio(1, 3)];
        let out = solve_pivp_variable(&int(0), &y0, &PolyVec::zero(1), &int(100), &pow2(-10), &int(1)).unwrap();
        assert_eq!(out.value(), Some(&y0));
        assert_eq!(out.run().trace.len(), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = linear(1);
        assert!(matches!(
            solve_pivp_variable(&int(1), &[int(1)], &p, &int(0), &pow2(-10), &int(1)),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            solve_pivp_variable(&int(0), &[int(1), int(2)], &p, &int(1), &pow2(-10), &int(1)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let p = tan_system();
        let a = solve_pivp_variable(&int(0), &[int(0)], &p, &int(1), &pow2(-10), &int(16)).unwrap();
        let b = solve_pivp_variable(&int(0), &[int(0)], &p, &int(1), &pow2(-10), &int(16)).unwrap();
        assert_eq!(a, b);
        check_run(&int(0), &[int(0)], &p, &int(1), a.run());
    }

    #[test]
    fn interrupt_stops_before_first_step() {
        let p = linear(1);
        let out = solve_pivp_variable_with(&int(0), &[int(1)], &p, &int(1), &pow2(-10), &int(32), &mut || true).unwrap();
        assert!(matches!(out, SolveOutcome::Abort { reason: AbortReason::Interrupted, .. }));
    }
}
