use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::scalar::{self, Rational};
use crate::validation::closed_form::{oracle_value, ClosedForm};

/// Bits requested from the oracle for every integrand sample.
const SAMPLE_BITS: u32 = 60;
const MAX_DEPTH: u32 = 40;
const KINK_SAMPLES: usize = 64;
const KINK_WIDTH: f64 = 9.094947017729282e-13; // 2^-40

/// A quadrature value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn upper(&self) -> Rational {
        Rational::from_float(self.value + self.error).expect("finite")
    }

    pub fn lower(&self) -> Rational {
        Rational::from_float(self.value - self.error).expect("finite")
    }
}

/// ‖y(u)‖∞ from the oracle.
pub fn state_norm(cf: &ClosedForm, u: f64) -> Result<f64> {
    let t = Rational::from_float(u).ok_or_else(|| Error::Domain(format!("non-finite time {u}")))?;
    let y = oracle_value(cf, &t, SAMPLE_BITS)?;
    Ok(y.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY).abs()).fold(0.0, f64::max))
}

fn check_domain(cf: &ClosedForm, t0: &Rational, t: &Rational) -> Result<(f64, f64)> {
    if t < t0 {
        return Err(Error::Parameter(format!("interval [{t0}, {t}] is reversed")));
    }
    let (a, b) = (t0.to_f64().unwrap_or(f64::NAN), t.to_f64().unwrap_or(f64::NAN));
    if let Some(blow) = cf.blow_up_time() {
        if b >= blow || a <= -blow {
            return Err(Error::Domain(format!("{cf} has no solution on [{t0}, {t}]")));
        }
    }
    Ok((a, b))
}

/// Integral of `f` over [a, b] to relative tolerance `tol`, splitting at the
/// sign changes of `kink`.
pub fn integrate<F, K>(mut f: F, mut kink: K, a: f64, b: f64, tol: f64) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
    K: FnMut(f64) -> Result<f64>,
{
    if tol <= 0.0 {
        return Err(Error::Parameter(format!("tolerance {tol} must be positive")));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut cuts = vec![a];
    let h = (b - a) / KINK_SAMPLES as f64;
    let mut prev = kink(a)?;
    for i in 1..=KINK_SAMPLES {
        let x = if i == KINK_SAMPLES { b } else { a + h * i as f64 };
        let cur = kink(x)?;
        if (prev < 0.0) != (cur < 0.0) {
            let (mut lo, mut hi) = (x - h, x);
            while hi - lo > KINK_WIDTH {
                let mid = 0.5 * (lo + hi);
                if (kink(mid)? < 0.0) == (prev < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    cuts.push(b);

    // coarse pass fixes the absolute target
    let mut coarse = 0.0;
    for w in cuts.windows(2) {
        coarse += composite_simpson(&mut f, w[0], w[1], 16)?.abs();
    }
    let abs_tol = tol * coarse.max(f64::MIN_POSITIVE);

    let mut value = 0.0;
    let mut error = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let share = abs_tol * (hi - lo) / (b - a);
        let (fa, fm, fb) = (f(lo)?, f(0.5 * (lo + hi))?, f(hi)?);
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        let (v, e) = simpson(&mut f, lo, hi, fa, fm, fb, whole, share, MAX_DEPTH)?;
        value += v;
        error += e;
    }
    error += 64.0 * f64::EPSILON * coarse;
    Ok(Estimate { value, error })
}

fn composite_simpson<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64, panels: usize) -> Result<f64> {
    let h = (b - a) / (2 * panels) as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..2 * panels {
        sum += f(a + h * i as f64)? * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok(sum * h / 3.0)
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<(f64, f64)> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return Ok((left + right + diff / 15.0, diff.abs() / 15.0));
    }
    let (lv, le) = simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let (rv, re) = simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Ok((lv + rv, le + re))
}

fn degree_bound(cf: &ClosedForm) -> (i32, f64) {
    let p = cf.system();
    (p.degree().max(2) as i32, p.sigma().to_f64().expect("finite"))
}

/// ∫ kσ max(1, ε + ‖y(u)‖)^{k−1} du over [t0, t], with ε clamped to 1/(4k).
pub fn estimate_int(cf: &ClosedForm, t0: &Rational, t: &Rational, eps: &Rational, tol: f64) -> Result<Estimate> {
    let (a, b) = check_domain(cf, t0, t)?;
    let (k, sigma) = degree_bound(cf);
    let cap = scalar::ratio(1, 4 * k as i64);
    let eps = if *eps < cap { eps.clone() } else { cap }.to_f64().expect("finite");
    integrate(
        |u| Ok(k as f64 * sigma * (eps + state_norm(cf, u)?).max(1.0).powi(k - 1)),
        |u| Ok(eps + state_norm(cf, u)? - 1.0),
        a,
        b,
        tol,
    )
}

/// ∫ σ max(1, ‖y(u)‖)^k du over [t0, t].
pub fn estimate_len(cf: &ClosedForm, t0: &Rational, t: &Rational, tol: f64) -> Result<Estimate> {
    let (a, b) = check_domain(cf, t0, t)?;
    let (k, sigma) = degree_bound(cf);
    integrate(
        |u| Ok(sigma * state_norm(cf, u)?.max(1.0).powi(k)),
        |u| Ok(state_norm(cf, u)? - 1.0),
        a,
        b,
        tol,
    )
}
