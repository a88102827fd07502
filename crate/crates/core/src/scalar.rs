//! Exact rational scalars and the few inexact helpers the solver needs.
//!
//! Every scalar in the crate is a reduced [`BigRational`]; the text form
//! (`-7/3`, `42`) is the `Display` output of that type and parses back
//! bit-exactly through [`parse_rational`].

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// A point of ℚᵈ.
pub type RVector = Vec<Rational>;

/// Default guard precision for [`exp_upper`] when deriving solver parameters.
pub const EXP_GUARD_BITS: u32 = 32;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// 2^e for any integer e.
pub fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << (e as u64))
    } else {
        Rational::new(BigInt::one(), BigInt::one() << ((-e) as u64))
    }
}

/// `max(1, x)`.
pub fn max_one(x: &Rational) -> Rational {
    if x > &Rational::one() {
        x.clone()
    } else {
        Rational::one()
    }
}

/// `x^e` with the convention `0^0 = 1`.
pub fn pow(x: &Rational, e: u32) -> Rational {
    num_traits::pow(x.clone(), e as usize)
}

/// ‖x‖∞.
pub fn infnorm(x: &[Rational]) -> Result<Rational> {
    if x.is_empty() {
        return Err(Error::dimension("infnorm argument", 1, 0));
    }
    Ok(x.iter().map(|v| v.abs()).max().expect("nonempty"))
}

/// Bit size of a rational: `max(1, ⌈log₂(1+|p|)⌉) + max(1, ⌈log₂(1+q)⌉)`.
pub fn rsize(x: &Rational) -> u64 {
    let num = x.numer().bits().max(1);
    let den = x.denom().bits().max(1);
    num + den
}

/// `n / d` rounded to the nearest integer, ties to even. `d` must be positive.
pub(crate) fn div_round_half_even(n: &BigInt, d: &BigInt) -> BigInt {
    debug_assert!(d.is_positive());
    let (q, r) = n.div_mod_floor(d);
    // 0 <= r < d
    let twice = &r << 1u32;
    match twice.cmp(d) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

/// `x · 2^shift` as a floor/ceil/nearest integer.
pub(crate) fn scaled_floor(x: &Rational, shift: i64) -> BigInt {
    let (n, d) = scaled_parts(x, shift);
    n.div_floor(&d)
}

pub(crate) fn scaled_ceil(x: &Rational, shift: i64) -> BigInt {
    let (n, d) = scaled_parts(x, shift);
    n.div_ceil(&d)
}

fn scaled_parts(x: &Rational, shift: i64) -> (BigInt, BigInt) {
    if shift >= 0 {
        (x.numer() << (shift as u64), x.denom().clone())
    } else {
        (x.numer().clone(), x.denom() << ((-shift) as u64))
    }
}

/// `num / den` in lowest terms, reducing power-of-two denominators by
/// shifting instead of a general gcd. `den` must be nonzero.
pub fn reduced(num: BigInt, den: BigInt) -> Rational {
    let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
    match den.trailing_zeros() {
        Some(z) if den.bits() == z + 1 => from_scaled(num, z as i64),
        _ => Rational::new(num, den),
    }
}

/// `a · b` via [`reduced`].
pub fn mul(a: &Rational, b: &Rational) -> Rational {
    reduced(a.numer() * b.numer(), a.denom() * b.denom())
}

/// `a / b` via [`reduced`]; `b` must be nonzero.
pub fn div(a: &Rational, b: &Rational) -> Rational {
    reduced(a.numer() * b.denom(), a.denom() * b.numer())
}

/// `a + b` via [`reduced`].
pub fn add(a: &Rational, b: &Rational) -> Rational {
    if a.denom() == b.denom() {
        return reduced(a.numer() + b.numer(), a.denom().clone());
    }
    reduced(a.numer() * b.denom() + b.numer() * a.denom(), a.denom() * b.denom())
}

/// `m · 2^{-q}` as a rational.
pub(crate) fn from_scaled(m: BigInt, q: i64) -> Rational {
    if q <= 0 {
        return Rational::from_integer(m << ((-q) as u64));
    }
    // reduce against the power of two directly; a general gcd is quadratic here
    let z = m.trailing_zeros().map_or(q, |z| (z as i64).min(q));
    let m = if m.is_zero() { m } else { m >> (z as u64) };
    let d = if m.is_zero() { BigInt::one() } else { BigInt::one() << ((q - z) as u64) };
    Rational::new_raw(m, d)
}

/// Nearest multiple of `2^{-q}` to `x`, ties to the even multiple.
pub fn round_to(x: &Rational, q: i64) -> Rational {
    let (n, d) = scaled_parts(x, q);
    from_scaled(div_round_half_even(&n, &d), q)
}

/// Largest dyadic `m · 2^{-q}` not above the positive `x` whose integer
/// part `m` has at most `bits` bits.
pub fn floor_dyadic(x: &Rational, bits: u32) -> Rational {
    debug_assert!(x.is_positive() && bits > 0);
    let q = bits as i64 - 1 - floor_log2(x);
    from_scaled(scaled_floor(x, q), q)
}

/// Least integer `m` with `2^{-m} ≤ z`, i.e. `⌈-log₂ z⌉`.
pub fn ceil_neg_log2(z: &Rational) -> Result<i64> {
    if !z.is_positive() {
        return Err(Error::Domain(format!("-log2 of non-positive value {z}")));
    }
    Ok(-floor_log2(z))
}

/// `⌊log₂ z⌋` for `z > 0`.
pub(crate) fn floor_log2(z: &Rational) -> i64 {
    let num = z.numer().magnitude();
    let den = z.denom().magnitude();
    let e = num.bits() as i64 - den.bits() as i64;
    // 2^{e-1} < z < 2^{e+1}
    let at_least = if e >= 0 {
        num >= &(den << (e as u64))
    } else {
        (num << ((-e) as u64)) >= *den
    };
    if at_least {
        e
    } else {
        e - 1
    }
}

/// Two-sided enclosure `lo ≤ e^x ≤ hi` with relative width at most `2^{-g}`
/// on each side.
///
/// Argument reduction by `2^s` until `|x|/2^s ≤ 1/2`, a directed-rounding
/// series with the tail bounded by twice its first omitted term, then `s`
/// directed squarings. Negative arguments go through the reciprocal.
pub fn exp_enclosure(x: &Rational, g: u32) -> (Rational, Rational) {
    if x.is_negative() {
        let (lo, hi) = exp_enclosure(&-x, g + 1);
        return (hi.recip(), lo.recip());
    }
    let half = ratio(1, 2);
    let mut s: u32 = 0;
    let mut w = x.clone();
    while w > half {
        w /= int(2);
        s += 1;
    }
    let guard = g as i64 + s as i64;
    let work = guard + 64 - (guard as u64).leading_zeros() as i64 + 8;
    let tiny = pow2(-work);

    let mut term_up = Rational::one();
    let mut term_dn = Rational::one();
    let mut sum_up = Rational::zero();
    let mut sum_dn = Rational::zero();
    let mut j: i64 = 0;
    loop {
        if j > 0 && term_up <= tiny {
            break;
        }
        sum_up += &term_up;
        sum_dn += &term_dn;
        j += 1;
        let step = &w / int(j);
        term_up = from_scaled(scaled_ceil(&(&term_up * &step), work), work);
        term_dn = from_scaled(scaled_floor(&(&term_dn * &step), work), work);
    }
    // tail ≤ t_K / (1 - w) ≤ 2 t_K
    let mut hi = sum_up + term_up * int(2);
    let mut lo = sum_dn;
    for _ in 0..s {
        hi = from_scaled(scaled_ceil(&(&hi * &hi), work), work);
        lo = from_scaled(scaled_floor(&(&lo * &lo), work), work);
    }
    (lo, hi)
}

/// Rational `E` with `e^I ≤ E ≤ e^I (1 + 2^{-g})`.
pub fn exp_upper(i: &Rational, g: u32) -> Rational {
    exp_enclosure(i, g).1
}

/// Rational `E` with `e^I (1 - 2^{-g}) ≤ E ≤ e^I`.
pub fn exp_lower(i: &Rational, g: u32) -> Rational {
    exp_enclosure(i, g).0
}

/// Parses `[+-]digits[/digits]`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = |msg: &str| Error::parse(format!("rational {text:?}"), msg.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let num = parse_integer(num, true).ok_or_else(|| bad("malformed numerator"))?;
    let den = match den {
        Some(d) => parse_integer(d, false).ok_or_else(|| bad("malformed denominator"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

fn parse_integer(text: &str, signed: bool) -> Option<BigInt> {
    let (sign, digits) = match text.as_bytes().first()? {
        b'-' if signed => (Sign::Minus, &text[1..]),
        b'+' if signed => (Sign::Plus, &text[1..]),
        _ => (Sign::Plus, text),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let magnitude: BigInt = digits.parse().ok()?;
    Some(if sign == Sign::Minus { -magnitude } else { magnitude })
}

/// Decimal rendering with `digits` significant digits (round half away from zero).
pub fn to_decimal(x: &Rational, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1) as i64;
    let neg = x.is_negative();
    let ax = x.abs();
    let ten = int(10);
    // e = ⌊log₁₀ |x|⌋
    let mut e = ((floor_log2(&ax) as f64) * std::f64::consts::LOG10_2).floor() as i64;
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            num_traits::pow(ten.clone(), k as usize)
        } else {
            num_traits::pow(ten.clone(), (-k) as usize).recip()
        }
    };
    while pow10(e) > ax {
        e -= 1;
    }
    while pow10(e + 1) <= ax {
        e += 1;
    }
    let scaled = &ax * pow10(digits - 1 - e);
    let mut m = (scaled + ratio(1, 2)).floor().to_integer();
    if m.to_string().len() as i64 > digits {
        e += 1;
        m = ((&ax * pow10(digits - 1 - e)) + ratio(1, 2)).floor().to_integer();
    }
    let mantissa = m.to_string();
    let body = if (-6..digits).contains(&e) {
        if e >= 0 {
            let int_len = (e + 1) as usize;
            let (a, b) = mantissa.split_at(int_len);
            if b.is_empty() {
                a.to_string()
            } else {
                format!("{a}.{b}")
            }
        } else {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), mantissa)
        }
    } else {
        let (a, b) = mantissa.split_at(1);
        format!("{a}.{b}e{e}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}
