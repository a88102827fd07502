//! Truncated Taylor series of the flow of y' = p(y).
//!
//! Two routes are provided. [`series_coefficients`] and
//! [`evaluate_truncated`] are exact and serve as the reference.
//! [`TaylorEngine`] (behind [`compute_taylor`]) is what the stepper uses: it
//! runs the same coefficient recurrence on the scaled series `c_n δ^n` in
//! certified fixed-point ball arithmetic and rounds once at the end.

mod ball;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::polyvec::PolyVec;
use crate::scalar::{self, Rational, RVector};

use ball::Plan;

/// First ω Taylor coefficients of each solution component at t = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesTruncation {
    pub dim: usize,
    pub order: usize,
    /// `coefficients[i][n]` is the coefficient of t^n in component i.
    pub coefficients: Vec<Vec<Rational>>,
}

fn check_dims(p: &PolyVec, y0: &[Rational]) -> Result<()> {
    if p.dim() != y0.len() {
        return Err(Error::dimension("initial condition", p.dim(), y0.len()));
    }
    Ok(())
}

/// Product of two series truncated after degree `n`.
fn mul_truncated(a: &[Rational], b: &[Rational], n: usize) -> Vec<Rational> {
    (0..=n)
        .map(|m| {
            (0..=m)
                .filter(|&i| i < a.len() && m - i < b.len())
                .map(|i| &a[i] * &b[m - i])
                .sum()
        })
        .collect()
}

/// Exact Taylor coefficients of Φ_p(0, y0) by iterated truncated composition:
/// with the order-(n+1) truncation Y known, the degree-n coefficient of
/// p(Y) divided by n+1 is the next coefficient.
pub fn series_coefficients(p: &PolyVec, y0: &[Rational], omega: usize) -> Result<SeriesTruncation> {
    check_dims(p, y0)?;
    if omega == 0 {
        return Err(Error::Parameter("series order must be at least 1".into()));
    }
    let d = p.dim();
    let mut ys: Vec<Vec<Rational>> = y0.iter().map(|v| vec![v.clone()]).collect();
    for n in 0..omega - 1 {
        let mut next = Vec::with_capacity(d);
        for comp in p.components() {
            let mut composed = vec![Rational::zero(); n + 1];
            for (alpha, c) in comp.terms() {
                let mut prod = vec![Rational::zero(); n + 1];
                prod[0] = Rational::one();
                for (j, &e) in alpha.exponents().iter().enumerate() {
                    for _ in 0..e {
                        prod = mul_truncated(&prod, &ys[j], n);
                    }
                }
                for (acc, v) in composed.iter_mut().zip(prod) {
                    *acc += c * v;
                }
            }
            next.push(&composed[n] / scalar::int(n as i64 + 1));
        }
        for (series, v) in ys.iter_mut().zip(next) {
            series.push(v);
        }
    }
    Ok(SeriesTruncation {
        dim: d,
        order: omega,
        coefficients: ys,
    })
}

/// Σ_{k<ω} c_k δ^k per component, exact, in Horner order.
pub fn evaluate_truncated(series: &SeriesTruncation, delta: &Rational) -> RVector {
    series
        .coefficients
        .iter()
        .map(|cs| {
            cs.iter()
                .rev()
                .fold(Rational::zero(), |acc, c| acc * delta + c)
        })
        .collect()
}

/// Bits of the output grid used by [`compute_taylor`] for budget μ.
pub fn rounding_precision(mu: &Rational) -> Result<i64> {
    Ok(scalar::ceil_neg_log2(mu)? + 1)
}

/// Reusable evaluator for one polynomial system.
#[derive(Debug, Clone)]
pub struct TaylorEngine {
    p: PolyVec,
    plan: Plan,
}

impl TaylorEngine {
    pub fn new(p: &PolyVec) -> Self {
        TaylorEngine {
            p: p.clone(),
            plan: Plan::new(p),
        }
    }

    pub fn system(&self) -> &PolyVec {
        &self.p
    }

    /// A value within μ of the order-ω truncated series at δ.
    ///
    /// Components are multiples of `2^{-q}`, `q = ⌈-log₂ μ⌉ + 1`, except at
    /// an exact equilibrium (p(y0) = 0) where y0 itself is returned.
    /// `ops` is incremented by the number of ball multiplications.
    pub fn evaluate(
        &self,
        y0: &[Rational],
        omega: usize,
        mu: &Rational,
        delta: &Rational,
        ops: &mut u64,
    ) -> Result<RVector> {
        check_dims(&self.p, y0)?;
        if !mu.is_positive() {
            return Err(Error::Parameter(format!("rounding budget {mu} must be positive")));
        }
        if omega == 0 {
            return Err(Error::Parameter("series order must be at least 1".into()));
        }
        // At an equilibrium every higher coefficient vanishes.
        if !self.plan.moves(y0) && self.p.eval(y0)?.iter().all(Zero::is_zero) {
            return Ok(y0.to_vec());
        }
        let q = rounding_precision(mu)?;
        let work_bits = 64 - (omega as u64 * self.plan.work_estimate().max(1) as u64).leading_zeros() as u64;
        let mut guard = 2 * work_bits + 16;
        loop {
            let prec = q.max(0) as u64 + guard;
            let sums = self.plan.run(y0, omega, delta, prec, ops);
            let budget = BigInt::one() << (prec as i64 - q) as u64;
            if sums.iter().all(|b| BigInt::from(b.rad.clone()) <= budget) {
                return Ok(sums
                    .into_iter()
                    .map(|b| {
                        let m = scalar::div_round_half_even(&b.mid, &(BigInt::one() << (prec as i64 - q) as u64));
                        scalar::from_scaled(m, q)
                    })
                    .collect());
            }
            guard *= 2;
        }
    }
}

/// ComputeTaylor: x with ‖x − T_ω Φ_p(0, y0)(δ)‖∞ ≤ μ.
pub fn compute_taylor(
    p: &PolyVec,
    y0: &[Rational],
    omega: usize,
    mu: &Rational,
    delta: &Rational,
) -> Result<RVector> {
    let mut ops = 0;
    TaylorEngine::new(p).evaluate(y0, omega, mu, delta, &mut ops)
}

/// `α|Mt|ⁿ / (1 − |Mt|)` with `k = max(2, deg p)`, `α = max(1, ‖y0‖∞)`,
/// `M = (k−1) σ(p) α^{k−1}`; bounds ‖y(t) − T_n y(t)‖∞ for |t| < 1/M.
pub fn remainder_bound(p: &PolyVec, y0: &[Rational], n: u32, t: &Rational) -> Result<Rational> {
    check_dims(p, y0)?;
    let k = p.degree().max(2);
    let alpha = scalar::max_one(&scalar::infnorm(y0)?);
    let m = scalar::int(k as i64 - 1) * p.sigma() * scalar::pow(&alpha, k - 1);
    let mt = (m * t).abs();
    if mt >= Rational::one() {
        return Err(Error::Domain(format!(
            "|Mt| = {mt} is not below 1; the remainder bound does not apply"
        )));
    }
    Ok(alpha * scalar::pow(&mt, n) / (Rational::one() - mt))
}
