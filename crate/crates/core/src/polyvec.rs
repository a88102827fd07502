//! Sparse multivariate polynomials over ℚ and square polynomial systems.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{self, Rational, RVector};

/// Exponent vector α of a monomial x^α.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// x_j as a multi-index.
    pub fn unit(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree |α|.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// A polynomial in `dim` variables; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        let mut p = Poly::zero(dim);
        p.add_term(MultiIndex::zero(dim), c).expect("dimension matches");
        p
    }

    /// The coordinate polynomial x_j.
    pub fn var(dim: usize, j: usize) -> Self {
        let mut p = Poly::zero(dim);
        p.add_term(MultiIndex::unit(dim, j), Rational::one())
            .expect("dimension matches");
        p
    }

    /// Builds a polynomial, summing coefficients of repeated monomials.
    pub fn from_terms<I, E>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, E)>,
        E: Into<MultiIndex>,
    {
        let mut p = Poly::zero(dim);
        for (c, e) in terms {
            p.add_term(e.into(), c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, exponents: MultiIndex, coeff: Rational) -> Result<()> {
        if exponents.dim() != self.dim {
            return Err(Error::dimension("monomial exponents", self.dim, exponents.dim()));
        }
        let entry = self.terms.entry(exponents).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exponents: &MultiIndex) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest |α| among stored terms; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Σ|a_α|.
    pub fn sigma(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational> {
        if x.len() != self.dim {
            return Err(Error::dimension("evaluation point", self.dim, x.len()));
        }
        let powers = PowerTable::new(x, self.max_exponents());
        Ok(self.eval_with(&powers))
    }

    fn eval_with(&self, powers: &PowerTable) -> Rational {
        let mut acc = Rational::zero();
        for (alpha, c) in &self.terms {
            let mut m = c.clone();
            for (j, &e) in alpha.exponents().iter().enumerate() {
                if e > 0 {
                    m *= powers.get(j, e);
                }
            }
            acc += m;
        }
        acc
    }

    fn max_exponents(&self) -> Vec<u32> {
        let mut out = vec![0; self.dim];
        for alpha in self.terms.keys() {
            for (m, &e) in out.iter_mut().zip(alpha.exponents()) {
                *m = (*m).max(e);
            }
        }
        out
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        if other.dim != self.dim {
            return Err(Error::dimension("polynomial sum", self.dim, other.dim));
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone())?;
        }
        Ok(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (alpha, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (j, &e) in alpha.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*y{}", j + 1)?,
                    _ => write!(f, "*y{}^{e}", j + 1)?,
                }
            }
        }
        Ok(())
    }
}

/// x_j^e for every variable, up to the largest exponent needed.
struct PowerTable {
    powers: Vec<Vec<Rational>>,
}

impl PowerTable {
    fn new(x: &[Rational], max_exp: Vec<u32>) -> Self {
        let powers = x
            .iter()
            .zip(max_exp)
            .map(|(xj, m)| {
                let mut row = Vec::with_capacity(m as usize + 1);
                row.push(Rational::one());
                for e in 1..=m as usize {
                    let next = &row[e - 1] * xj;
                    row.push(next);
                }
                row
            })
            .collect();
        PowerTable { powers }
    }

    fn get(&self, j: usize, e: u32) -> &Rational {
        &self.powers[j][e as usize]
    }
}

/// The right-hand side p of y' = p(y): `d` polynomials in `d` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyVec {
    components: Vec<Poly>,
}

impl PolyVec {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        let d = components.len();
        if d == 0 {
            return Err(Error::dimension("polynomial system", 1, 0));
        }
        for p in &components {
            if p.dim() != d {
                return Err(Error::dimension("polynomial system variables", d, p.dim()));
            }
        }
        Ok(PolyVec { components })
    }

    /// The identically-zero system in `dim` variables.
    pub fn zero(dim: usize) -> Self {
        PolyVec {
            components: (0..dim).map(|_| Poly::zero(dim)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    /// deg(p) = max over components; 0 for the zero system.
    pub fn degree(&self) -> u32 {
        self.components.iter().map(Poly::degree).max().unwrap_or(0)
    }

    /// σ(p) = max over components of Σ|a_α|.
    pub fn sigma(&self) -> Rational {
        self.components
            .iter()
            .map(Poly::sigma)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &[Rational]) -> Result<RVector> {
        if x.len() != self.dim() {
            return Err(Error::dimension("evaluation point", self.dim(), x.len()));
        }
        let mut max_exp = vec![0; self.dim()];
        for p in &self.components {
            for (m, e) in max_exp.iter_mut().zip(p.max_exponents()) {
                *m = (*m).max(e);
            }
        }
        let powers = PowerTable::new(x, max_exp);
        Ok(self.components.iter().map(|p| p.eval_with(&powers)).collect())
    }

    /// `k M^{k-1} σ(p)` with `k = deg(p)`: a Lipschitz constant for p on the
    /// ball ‖x‖∞ ≤ M when M ≥ 1 (or p is homogeneous of degree k).
    ///
    /// Below 1 the lower-degree terms dominate: x + x³ on ‖x‖ ≤ 1/10 has
    /// slope near 1 but the formula gives 3/50.
    pub fn lipschitz_bound(&self, m: &Rational) -> Result<Rational> {
        if m.is_negative() {
            return Err(Error::Parameter(format!("Lipschitz radius {m} is negative")));
        }
        let k = self.degree();
        if k == 0 {
            return Ok(Rational::zero());
        }
        Ok(scalar::int(k as i64) * scalar::pow(m, k - 1) * self.sigma())
    }
}

/// Turns y' = f(y, t) into an autonomous system by appending a clock
/// variable with derivative 1.
///
/// Each input lives in `d + 1` variables, the last one standing for time.
pub fn autonomize(timed: &[Poly]) -> Result<PolyVec> {
    let d = timed.len();
    let mut components = Vec::with_capacity(d + 1);
    for p in timed {
        if p.dim() != d + 1 {
            return Err(Error::dimension("time-dependent component variables", d + 1, p.dim()));
        }
        components.push(p.clone());
    }
    components.push(Poly::constant(d + 1, Rational::one()));
    PolyVec::new(components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, parse_rational};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn poly(dim: usize, terms: &[(i64, &[u32])]) -> Poly {
        Poly::from_terms(dim, terms.iter().map(|&(c, e)| (int(c), e.to_vec()))).unwrap()
    }

    fn spiking(m: i64) -> PolyVec {
        PolyVec::new(vec![
            poly(2, &[(m, &[0, 1]), (-1, &[1, 0])]),
            poly(2, &[(-1, &[0, 1])]),
        ])
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let p = PolyVec::new(vec![poly(2, &[(1, &[0, 1])]), poly(2, &[(1, &[1, 1])])]).unwrap();
        assert_eq!(p.eval(&[int(2), int(3)]).unwrap(), vec![int(3), int(6)]);
        assert_eq!(spiking(4).eval(&[int(0), int(1)]).unwrap(), vec![int(4), int(-1)]);

        let with_consts = PolyVec::new(vec![
            poly(2, &[(5, &[0, 0]), (3, &[2, 1])]),
            poly(2, &[(-7, &[0, 0]), (1, &[0, 3])]),
        ])
        .unwrap();
        assert_eq!(with_consts.eval(&[int(0), int(0)]).unwrap(), vec![int(5), int(-7)]);
        assert!(matches!(p.eval(&[int(1)]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn degree_and_sigma_examples() {
        let p = PolyVec::new(vec![poly(2, &[(1, &[0, 1])]), poly(2, &[(1, &[1, 1])])]).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(spiking(4).degree(), 1);
        assert_eq!(spiking(4).sigma(), int(5));
        assert_eq!(PolyVec::zero(3).degree(), 0);
        assert_eq!(PolyVec::zero(3).sigma(), int(0));

        let single = poly(2, &[(3, &[2, 0]), (-2, &[1, 1]), (5, &[0, 0])]);
        assert_eq!(single.sigma(), int(10));
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut p = poly(1, &[(2, &[1])]);
        p.add_term(MultiIndex::new(vec![1]), int(-2)).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
    }

    #[test]
    fn rejects_non_square_and_bad_exponents() {
        assert!(PolyVec::new(vec![Poly::zero(2)]).is_err());
        let mut p = Poly::zero(2);
        assert!(p.add_term(MultiIndex::new(vec![1]), int(1)).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let p = PolyVec::new(vec![poly(1, &[(3, &[2]), (-2, &[1]), (5, &[0])])]).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.lipschitz_bound(&int(2)).unwrap(), int(40));

        let linear = spiking(4);
        assert_eq!(linear.lipschitz_bound(&int(0)).unwrap(), int(5));
        assert_eq!(linear.lipschitz_bound(&int(100)).unwrap(), int(5));
        assert!(linear.lipschitz_bound(&int(-1)).is_err());
    }

    pub(crate) fn random_system(rng: &mut impl Rng, d: usize, k: u32) -> PolyVec {
        let comps = (0..d)
            .map(|_| {
                let nterms = rng.gen_range(0..=5);
                let terms: Vec<(Rational, Vec<u32>)> = (0..nterms)
                    .map(|_| {
                        let mut e = vec![0u32; d];
                        let deg = rng.gen_range(0..=k);
                        for _ in 0..deg {
                            e[rng.gen_range(0..d)] += 1;
                        }
                        (scalar::ratio(rng.gen_range(-16..=16), rng.gen_range(1..=2)), e)
                    })
                    .collect();
                Poly::from_terms(d, terms).unwrap()
            })
            .collect();
        PolyVec::new(comps).unwrap()
    }

    #[test]
    fn lipschitz_property_randomized() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..300 {
            let d = rng.gen_range(1..=3);
            let k = rng.gen_range(1..=4);
            let p = random_system(&mut rng, d, k);
            let m = scalar::ratio(rng.gen_range(4..=16), 4);
            let point = |rng: &mut rand::rngs::StdRng| -> RVector {
                (0..d)
                    .map(|_| {
                        let u = scalar::ratio(rng.gen_range(-64..=64), 64);
                        u * &m
                    })
                    .collect()
            };
            let a = point(&mut rng);
            let b = point(&mut rng);
            let pa = p.eval(&a).unwrap();
            let pb = p.eval(&b).unwrap();
            let diff: RVector = pb.iter().zip(&pa).map(|(x, y)| x - y).collect();
            let gap: RVector = b.iter().zip(&a).map(|(x, y)| x - y).collect();
            let lhs = scalar::infnorm(&diff).unwrap();
            let rhs = p.lipschitz_bound(&m).unwrap() * scalar::infnorm(&gap).unwrap();
            assert!(lhs <= rhs, "p = {:?}, a = {a:?}, b = {b:?}", p.components());
        }
    }

    #[test]
    fn lipschitz_formula_fails_below_unit_radius() {
        let p = PolyVec::new(vec![poly(1, &[(1, &[1]), (1, &[3])])]).unwrap();
        let m = scalar::ratio(1, 10);
        let bound = p.lipschitz_bound(&m).unwrap();
        assert_eq!(bound, scalar::ratio(3, 50));
        let (a, b) = (int(0), m.clone());
        let lhs = p.eval(&[b.clone()]).unwrap()[0].clone() - p.eval(&[a.clone()]).unwrap()[0].clone();
        assert!(lhs > bound * (b - a));
    }

    #[test]
    fn autonomize_examples() {
        // y' = t
        let sys = autonomize(&[poly(2, &[(1, &[0, 1])])]).unwrap();
        assert_eq!(sys.dim(), 2);
        assert_eq!(sys.components()[0], Poly::var(2, 1));
        assert_eq!(sys.components()[1], Poly::constant(2, int(1)));

        // y' = t y
        let sys = autonomize(&[poly(2, &[(1, &[1, 1])])]).unwrap();
        assert_eq!(sys.components()[0].coeff(&MultiIndex::new(vec![1, 1])), int(1));
        assert_eq!(sys.degree(), 2);

        // autonomous input gains a decoupled clock
        let sys = autonomize(&[poly(3, &[(-1, &[1, 0, 0])]), poly(3, &[(2, &[1, 1, 0])])]).unwrap();
        assert_eq!(sys.dim(), 3);
        assert_eq!(sys.eval(&[int(1), int(1), int(9)]).unwrap(), vec![int(-1), int(2), int(1)]);

        assert!(autonomize(&[Poly::zero(1)]).is_err());
    }

    #[test]
    fn autonomize_degree_and_sigma() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let d = rng.gen_range(1..=3);
            let timed: Vec<Poly> = random_system(&mut rng, d + 1, 3).components()[..d].to_vec();
            let sys = autonomize(&timed).unwrap();
            let deg_in = timed.iter().map(Poly::degree).max().unwrap();
            let sigma_in = timed.iter().map(Poly::sigma).max().unwrap();
            assert_eq!(sys.degree(), deg_in);
            assert_eq!(sys.sigma(), scalar::max_one(&sigma_in));
        }
    }

    proptest! {
        #[test]
        fn eval_is_linear_in_coefficients(seed in 0u64..1000) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let d = rng.gen_range(1..=3);
            let p = random_system(&mut rng, d, 3);
            let r = random_system(&mut rng, d, 3);
            let x: RVector = (0..d).map(|_| scalar::ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5))).collect();
            let sum: Vec<Poly> = p.components().iter().zip(r.components()).map(|(a, b)| a.add(b).unwrap()).collect();
            let lhs = PolyVec::new(sum).unwrap().eval(&x).unwrap();
            let rhs: RVector = p.eval(&x).unwrap().iter().zip(r.eval(&x).unwrap()).map(|(a, b)| a + b).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn sigma_dominates_coefficients_and_ignores_variable_order(seed in 0u64..1000) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let p = random_system(&mut rng, 2, 3);
            for comp in p.components() {
                for (_, c) in comp.terms() {
                    prop_assert!(p.sigma() >= c.abs());
                }
            }
            let swapped: Vec<Poly> = p.components().iter().map(|c| {
                Poly::from_terms(2, c.terms().map(|(e, v)| {
                    let x = e.exponents();
                    (v.clone(), vec![x[1], x[0]])
                })).unwrap()
            }).collect();
            prop_assert_eq!(PolyVec::new(swapped).unwrap().sigma(), p.sigma());
        }
    }

    #[test]
    fn display_is_readable() {
        let p = poly(2, &[(4, &[0, 1]), (-1, &[1, 0])]);
        assert_eq!(p.to_string(), "(4)*y2 + (-1)*y1");
        assert_eq!(Poly::zero(1).to_string(), "0");
        let _ = q("1");
    }
}
