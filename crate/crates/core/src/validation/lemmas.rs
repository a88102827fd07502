use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{self, Rational};
use crate::validation::closed_form::{oracle_value, ClosedForm};
use crate::validation::quadrature::{integrate, state_norm};

fn check_lengths(a: &[Rational], b: &[Rational]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::dimension("sequence b", a.len(), b.len()));
    }
    Ok(())
}

/// u_n = u₀∏aᵢ + Σᵢ bᵢ∏_{j>i} aⱼ for u_{k+1} = a_k u_k + b_k.
pub fn arithgeo_closed_form(u0: &Rational, a: &[Rational], b: &[Rational]) -> Result<Rational> {
    check_lengths(a, b)?;
    let n = a.len();
    // suffix[i] = a_i · … · a_{n−1}
    let mut suffix = vec![Rational::one(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = &a[i] * &suffix[i + 1];
    }
    let mut total = u0 * &suffix[0];
    for i in 0..n {
        total += &b[i] * &suffix[i + 1];
    }
    Ok(total)
}

/// Iterates u_{k+1} = a_k u_k + b_k directly.
pub fn arithgeo_recurrence(u0: &Rational, a: &[Rational], b: &[Rational]) -> Result<Rational> {
    check_lengths(a, b)?;
    Ok(a.iter().zip(b).fold(u0.clone(), |u, (ak, bk)| ak * u + bk))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DependencyCheck {
    /// ‖z(t) − y(t)‖∞ ≤ μ(t) + oracle slack.
    Holds { distance: Rational, bound: Rational },
    Violated { distance: Rational, bound: Rational },
    /// μ(t) ≥ ε, so nothing is claimed.
    HypothesisNotMet { bound: Rational },
}

/// Compares the distance between two solutions of the same system with
/// μ(t) = ‖z₀ − y₀‖∞ exp(kσ ∫₀ᵗ (ε + ‖y(u)‖)^{k−1} du), k = max(2, deg p).
pub fn dependency_bound_check(
    y: &ClosedForm,
    z: &ClosedForm,
    t: &Rational,
    eps: &Rational,
    prec: u32,
) -> Result<DependencyCheck> {
    let p = y.system();
    if z.system() != p {
        return Err(Error::Parameter(format!("{y} and {z} are different systems")));
    }
    if t.is_negative() {
        return Err(Error::Parameter(format!("horizon {t} must be nonnegative")));
    }
    let gap = scalar::infnorm(
        &y.initial()
            .iter()
            .zip(z.initial())
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    )?;
    let k = p.degree().max(2) as i32;
    let sigma = p.sigma();
    let bound = if gap.is_zero() {
        Rational::zero()
    } else {
        let e = eps.to_f64().expect("finite");
        let tf = t.to_f64().expect("finite");
        let est = integrate(
            |u| Ok((e + state_norm(y, u)?).powi(k - 1)),
            |_| Ok(1.0),
            0.0,
            tf,
            1e-10,
        )?;
        let exponent = scalar::int(k as i64) * &sigma * est.upper();
        &gap * scalar::exp_upper(&exponent, prec)
    };
    if bound >= *eps {
        return Ok(DependencyCheck::HypothesisNotMet { bound });
    }
    let yv = oracle_value(y, t, prec)?;
    let zv = oracle_value(z, t, prec)?;
    let distance = scalar::infnorm(&yv.iter().zip(&zv).map(|(a, b)| a - b).collect::<Vec<_>>())?;
    let slack = scalar::pow2(2 - prec as i64);
    if distance <= &bound + slack {
        Ok(DependencyCheck::Holds { distance, bound })
    } else {
        Ok(DependencyCheck::Violated { distance, bound })
    }
}
