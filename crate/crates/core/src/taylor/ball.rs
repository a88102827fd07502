//! Fixed-point ball arithmetic for the scaled Taylor recurrence.
//!
//! A ball is `[mid - rad, mid + rad] · 2^{-P}` with integer `mid` and `rad`;
//! every operation rounds `mid` and widens `rad` so the true value stays
//! inside.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::polyvec::{MultiIndex, PolyVec};
use crate::scalar::Rational;

#[derive(Debug, Clone)]
pub(crate) struct Ball {
    pub mid: BigInt,
    pub rad: BigUint,
}

impl Ball {
    fn zero() -> Self {
        Ball {
            mid: BigInt::zero(),
            rad: BigUint::zero(),
        }
    }

    pub fn from_rational(x: &Rational, prec: u64) -> Self {
        if let Some(e) = power_of_two(x.denom()) {
            if e <= prec {
                return Ball {
                    mid: x.numer() << (prec - e),
                    rad: BigUint::zero(),
                };
            }
        }
        let num = x.numer() << prec;
        let (q, r) = num.div_mod_floor(x.denom());
        let rad = if r.is_zero() {
            BigUint::zero()
        } else {
            BigUint::one()
        };
        Ball { mid: q, rad }
    }

    fn add_assign(&mut self, other: &Ball) {
        self.mid += &other.mid;
        self.rad += &other.rad;
    }

    /// `self / d` for a positive integer `d`.
    fn div_small(&self, d: u64) -> Ball {
        let (q, r) = self.mid.div_rem(&BigInt::from(d));
        let mid = if r.sign() == Sign::Minus { q - 1 } else { q };
        let rad = if self.rad.is_zero() {
            BigUint::one()
        } else {
            (&self.rad / d) + 2u32
        };
        Ball { mid, rad }
    }

    fn mul_factor(&self, f: &Factor) -> Ball {
        match f {
            Factor::Dyadic { num, shift } => {
                let rad = if self.rad.is_zero() {
                    BigUint::one()
                } else {
                    ((&self.rad * num.magnitude()) >> *shift) + 2u32
                };
                Ball {
                    mid: (&self.mid * num) >> *shift,
                    rad,
                }
            }
            Factor::General(x) => self.mul_rational(x),
        }
    }

    /// `self · u / v` for an exact rational `u / v`.
    fn mul_rational(&self, x: &Rational) -> Ball {
        let (u, v) = (x.numer(), x.denom());
        let mid = (&self.mid * u).div_floor(v);
        let rad = if self.rad.is_zero() {
            BigUint::one()
        } else {
            let scaled = &self.rad * u.magnitude();
            scaled.div_ceil(v.magnitude()) + 1u32
        };
        Ball { mid, rad }
    }
}

fn power_of_two(v: &BigInt) -> Option<u64> {
    let z = v.trailing_zeros()?;
    (v.bits() == z + 1).then_some(z)
}

/// A term coefficient times δ, kept as `num · 2^{-shift}` when possible.
enum Factor {
    Dyadic { num: BigInt, shift: u64 },
    General(Rational),
}

impl Factor {
    fn new(x: Rational) -> Self {
        match power_of_two(x.denom()) {
            Some(shift) => Factor::Dyadic {
                num: x.numer().clone(),
                shift,
            },
            None => Factor::General(x),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Const,
    Var(usize),
    Node(usize),
}

/// Product node: series of `left · y_var`.
#[derive(Debug, Clone, Copy)]
struct Node {
    left: Slot,
    var: usize,
}

/// Monomial product DAG shared by all components of p.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    dim: usize,
    nodes: Vec<Node>,
    terms: Vec<Vec<(Slot, Rational)>>,
}

impl Plan {
    pub fn new(p: &PolyVec) -> Self {
        let dim = p.dim();
        let mut nodes = Vec::new();
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let terms = p
            .components()
            .iter()
            .map(|comp| {
                comp.terms()
                    .map(|(alpha, c)| (slot_for(alpha, &mut nodes, &mut index), c.clone()))
                    .collect()
            })
            .collect();
        Plan { dim, nodes, terms }
    }

    pub fn work_estimate(&self) -> usize {
        self.nodes.len() + self.terms.iter().map(Vec::len).sum::<usize>()
    }

    /// True when a low-precision enclosure of p(y0) already excludes zero
    /// in some component.
    pub fn moves(&self, y0: &[Rational]) -> bool {
        const PREC: u64 = 64;
        let mut ops = 0;
        let sums = self.run(y0, 2, &Rational::one(), PREC, &mut ops);
        sums.iter().zip(y0).any(|(s, y)| {
            let start = Ball::from_rational(y, PREC);
            let gap = (&s.mid - &start.mid).magnitude().clone();
            gap > &s.rad + &start.rad
        })
    }

    /// Runs the scaled recurrence z_{n+1} = δ/(n+1)·[p(z)]_n at precision
    /// `prec` and returns, per component, the ball enclosing Σ_{n<ω} z_n.
    pub fn run(
        &self,
        y0: &[Rational],
        omega: usize,
        delta: &Rational,
        prec: u64,
        ops: &mut u64,
    ) -> Vec<Ball> {
        let d = self.dim;
        let mut z: Vec<Vec<Ball>> = y0
            .iter()
            .map(|v| {
                let mut s = Vec::with_capacity(omega);
                s.push(Ball::from_rational(v, prec));
                s
            })
            .collect();
        let mut node_series: Vec<Vec<Ball>> = vec![Vec::with_capacity(omega); self.nodes.len()];
        let scaled_terms: Vec<Vec<(Slot, Factor)>> = self
            .terms
            .iter()
            .map(|ts| ts.iter().map(|(s, c)| (*s, Factor::new(c * delta))).collect())
            .collect();
        let one = Ball {
            mid: BigInt::one() << prec,
            rad: BigUint::zero(),
        };

        for n in 0..omega.saturating_sub(1) {
            for (k, node) in self.nodes.iter().enumerate() {
                let coeff = {
                    let left: &[Ball] = match node.left {
                        Slot::Var(j) => &z[j],
                        Slot::Node(m) => &node_series[m],
                        Slot::Const => unreachable!("constant never heads a product"),
                    };
                    convolve(left, &z[node.var], n, prec, ops)
                };
                node_series[k].push(coeff);
            }
            for i in 0..d {
                let mut acc = Ball::zero();
                for (slot, c) in &scaled_terms[i] {
                    let val = match *slot {
                        Slot::Const if n == 0 => &one,
                        Slot::Const => continue,
                        Slot::Var(j) => &z[j][n],
                        Slot::Node(m) => &node_series[m][n],
                    };
                    acc.add_assign(&val.mul_factor(c));
                    *ops += 1;
                }
                z[i].push(if n == 0 { acc } else { acc.div_small(n as u64 + 1) });
            }
        }

        z.into_iter()
            .map(|series| {
                let mut total = Ball::zero();
                for b in &series {
                    total.add_assign(b);
                }
                total
            })
            .collect()
    }
}

fn slot_for(
    alpha: &MultiIndex,
    nodes: &mut Vec<Node>,
    index: &mut HashMap<Vec<u32>, usize>,
) -> Slot {
    let e = alpha.exponents();
    match alpha.degree() {
        0 => Slot::Const,
        1 => Slot::Var(e.iter().position(|&x| x == 1).expect("degree one")),
        _ => {
            if let Some(&k) = index.get(e) {
                return Slot::Node(k);
            }
            let var = e.iter().rposition(|&x| x > 0).expect("nonzero degree");
            let mut parent = e.to_vec();
            parent[var] -= 1;
            let left = slot_for(&MultiIndex::new(parent), nodes, index);
            nodes.push(Node { left, var });
            let k = nodes.len() - 1;
            index.insert(e.to_vec(), k);
            Slot::Node(k)
        }
    }
}

/// Coefficient n of the product of two ball series.
fn convolve(a: &[Ball], b: &[Ball], n: usize, prec: u64, ops: &mut u64) -> Ball {
    let mut mid = BigInt::zero();
    let mut rad = BigUint::zero();
    for i in 0..=n {
        let (x, y) = (&a[i], &b[n - i]);
        mid += &x.mid * &y.mid;
        if !y.rad.is_zero() {
            rad += x.mid.magnitude() * &y.rad;
        }
        if !x.rad.is_zero() {
            rad += &x.rad * y.mid.magnitude();
            if !y.rad.is_zero() {
                rad += &x.rad * &y.rad;
            }
        }
    }
    *ops += n as u64 + 1;
    // floor shift loses < 1 ulp; the ceiling of rad/2^P adds at most one more
    Ball {
        mid: mid >> prec,
        rad: (rad >> prec) + 2u32,
    }
}
