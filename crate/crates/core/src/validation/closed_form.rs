use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::io::ProblemSpec;
use crate::polyvec::{MultiIndex, Poly, PolyVec};
use crate::scalar::{self, int, RVector, Rational};

/// Benchmark systems with a known exact solution from t = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedForm {
    /// y' = rate·y, y(0) = init; solution init·e^{rate·t}.
    LinearExp { rate: Rational, init: Rational },
    /// y' = m·z − y, z' = −z, (y, z)(0) = (0, 1); solution (m t e^{−t}, e^{−t}).
    Spiking { m: Rational },
    /// y₁' = y₁, y₂' = y₁y₂, y(0) = (1, 1); solution (e^t, e^{e^t − 1}).
    Tower2,
    /// y' = 1 + y², y(0) = 0; solution tan t, blowing up at π/2.
    Tan,
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Widest |t| at which the tangent oracle still tries to separate cos t from 0.
const TAN_LIMIT: i64 = 2;
/// Extra guard bits tried before declaring a point too close to blow-up.
const MAX_EXTRA_BITS: u32 = 4096;

impl ClosedForm {
    pub fn exp() -> Self {
        ClosedForm::LinearExp {
            rate: Rational::one(),
            init: Rational::one(),
        }
    }

    pub fn decay() -> Self {
        ClosedForm::LinearExp {
            rate: -Rational::one(),
            init: Rational::one(),
        }
    }

    /// Accepts `exp`, `decay`, `spiking:M`, `tower2`, `tan` and `linear:RATE:INIT`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let bad = |msg: String| Error::parse(format!("closed form {tag:?}"), msg);
        let mut parts = tag.split(':');
        let head = parts.next().unwrap_or("");
        let args: Vec<&str> = parts.collect();
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(bad(format!("expected {n} argument(s), found {}", args.len())))
            }
        };
        let rat = |s: &str| scalar::parse_rational(s).map_err(|e| bad(e.to_string()));
        match head {
            "exp" => want(0).map(|_| ClosedForm::exp()),
            "decay" => want(0).map(|_| ClosedForm::decay()),
            "tower2" => want(0).map(|_| ClosedForm::Tower2),
            "tan" => want(0).map(|_| ClosedForm::Tan),
            "spiking" => {
                want(1)?;
                Ok(ClosedForm::Spiking { m: rat(args[0])? })
            }
            "linear" => {
                want(2)?;
                Ok(ClosedForm::LinearExp {
                    rate: rat(args[0])?,
                    init: rat(args[1])?,
                })
            }
            _ => Err(bad("unknown benchmark".into())),
        }
    }

    pub fn tag(&self) -> String {
        match self {
            ClosedForm::LinearExp { rate, init } if init.is_one() && rate.is_one() => "exp".into(),
            ClosedForm::LinearExp { rate, init } if init.is_one() && (-rate).is_one() => "decay".into(),
            ClosedForm::LinearExp { rate, init } => format!("linear:{rate}:{init}"),
            ClosedForm::Spiking { m } => format!("spiking:{m}"),
            ClosedForm::Tower2 => "tower2".into(),
            ClosedForm::Tan => "tan".into(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ClosedForm::LinearExp { .. } | ClosedForm::Tan => 1,
            ClosedForm::Spiking { .. } | ClosedForm::Tower2 => 2,
        }
    }

    /// First positive time at which the solution ceases to exist.
    pub fn blow_up_time(&self) -> Option<f64> {
        match self {
            ClosedForm::Tan => Some(std::f64::consts::FRAC_PI_2),
            _ => None,
        }
    }

    pub fn initial(&self) -> RVector {
        match self {
            ClosedForm::LinearExp { init, .. } => vec![init.clone()],
            ClosedForm::Spiking { .. } => vec![int(0), int(1)],
            ClosedForm::Tower2 => vec![int(1), int(1)],
            ClosedForm::Tan => vec![int(0)],
        }
    }

    pub fn system(&self) -> PolyVec {
        let term = |p: &mut Poly, e: Vec<u32>, c: Rational| p.add_term(MultiIndex::new(e), c).expect("dimension matches");
        let comps = match self {
            ClosedForm::LinearExp { rate, .. } => {
                let mut y = Poly::zero(1);
                term(&mut y, vec![1], rate.clone());
                vec![y]
            }
            ClosedForm::Spiking { m } => {
                let mut y = Poly::zero(2);
                term(&mut y, vec![0, 1], m.clone());
                term(&mut y, vec![1, 0], int(-1));
                let mut z = Poly::zero(2);
                term(&mut z, vec![0, 1], int(-1));
                vec![y, z]
            }
            ClosedForm::Tower2 => {
                let mut y1 = Poly::zero(2);
                term(&mut y1, vec![1, 0], int(1));
                let mut y2 = Poly::zero(2);
                term(&mut y2, vec![1, 1], int(1));
                vec![y1, y2]
            }
            ClosedForm::Tan => {
                let mut y = Poly::constant(1, int(1));
                term(&mut y, vec![2], int(1));
                vec![y]
            }
        };
        PolyVec::new(comps).expect("square system")
    }

    pub fn problem(&self) -> ProblemSpec {
        ProblemSpec::from_system(&self.tag(), Rational::zero(), self.initial(), &self.system(), Some(&self.tag()))
    }

    /// Per-component enclosures of the solution at `t` with roughly `g` bits.
    fn enclose(&self, t: &Rational, g: u32) -> Result<Vec<(Rational, Rational)>> {
        let exp = |x: &Rational| scalar::exp_enclosure(x, g);
        Ok(match self {
            ClosedForm::LinearExp { rate, init } => vec![scale(init, exp(&(rate * t)))],
            ClosedForm::Spiking { m } => {
                let decay = exp(&-t);
                vec![scale(&(m * t), decay.clone()), decay]
            }
            ClosedForm::Tower2 => {
                let (lo, hi) = exp(t);
                let w = g as i64 + 8;
                let lo = scalar::from_scaled(scalar::scaled_floor(&lo, w), w);
                let hi = scalar::from_scaled(scalar::scaled_ceil(&hi, w), w);
                let outer_lo = scalar::exp_enclosure(&(&lo - int(1)), g).0;
                let outer_hi = scalar::exp_enclosure(&(&hi - int(1)), g).1;
                vec![(lo, hi), (outer_lo, outer_hi)]
            }
            ClosedForm::Tan => vec![tan_enclosure(t, g)?],
        })
    }
}

fn scale(c: &Rational, (lo, hi): (Rational, Rational)) -> (Rational, Rational) {
    if c.is_negative() {
        (c * hi, c * lo)
    } else {
        (c * lo, c * hi)
    }
}

/// Enclosures of (sin x, cos x) for 0 ≤ x ≤ 2 with absolute width ~2^{-g}.
fn sin_cos(x: &Rational, g: u32) -> ((Rational, Rational), (Rational, Rational)) {
    let tiny = scalar::pow2(-(g as i64) - 4);
    let x2 = x * x;
    let series = |first: Rational, offset: i64| {
        let mut term = first;
        let mut sum = Rational::zero();
        let mut k: i64 = 0;
        let mut sign = Rational::one();
        loop {
            if k > 2 && term.abs() <= tiny {
                break;
            }
            sum += &sign * &term;
            sign = -sign;
            let a = 2 * k + 1 + offset;
            term = term * &x2 / int(a * (a + 1));
            k += 1;
        }
        // terms decrease from here on, so the tail is below the next term
        let r = term.abs() * int(2);
        let w = g as i64 + 6;
        let lo = scalar::from_scaled(scalar::scaled_floor(&(&sum - &r), w), w);
        let hi = scalar::from_scaled(scalar::scaled_ceil(&(&sum + &r), w), w);
        (lo, hi)
    };
    (series(x.clone(), 1), series(Rational::one(), 0))
}

fn tan_enclosure(t: &Rational, g: u32) -> Result<(Rational, Rational)> {
    if t.is_negative() {
        let (lo, hi) = tan_enclosure(&-t, g)?;
        return Ok((-hi, -lo));
    }
    if *t >= int(TAN_LIMIT) {
        return Err(Error::Domain(format!("tan solution does not exist at t = {t}")));
    }
    let ((s_lo, s_hi), (c_lo, c_hi)) = sin_cos(t, g);
    if !c_hi.is_positive() {
        return Err(Error::Domain(format!("t = {t} is past the blow-up time of tan")));
    }
    if !c_lo.is_positive() {
        return Err(Error::Domain(format!("t = {t} is too close to the blow-up time of tan")));
    }
    let lo = if s_lo.is_negative() { &s_lo / &c_lo } else { &s_lo / &c_hi };
    let hi = if s_hi.is_negative() { &s_hi / &c_hi } else { &s_hi / &c_lo };
    Ok((lo, hi))
}

/// A rational approximation of the exact solution at `t` with error at most
/// `2^{-prec}` in every component.
pub fn oracle_value(cf: &ClosedForm, t: &Rational, prec: u32) -> Result<RVector> {
    let target = scalar::pow2(-(prec as i64));
    let grid = prec as i64 + 2;
    let mut g = prec + 8;
    loop {
        let boxes = match cf.enclose(t, g) {
            Ok(b) => b,
            Err(Error::Domain(msg)) if msg.contains("too close") && g < prec + MAX_EXTRA_BITS => {
                g *= 2;
                continue;
            }
            Err(e) => return Err(e),
        };
        if boxes.iter().all(|(lo, hi)| hi - lo <= target) {
            return Ok(boxes
                .into_iter()
                .map(|(lo, hi)| scalar::round_to(&((lo + hi) / int(2)), grid))
                .collect());
        }
        if g >= prec + MAX_EXTRA_BITS {
            return Err(Error::Domain(format!("{cf} oracle cannot reach {prec} bits at t = {t}")));
        }
        g += g / 2 + 8;
    }
}
