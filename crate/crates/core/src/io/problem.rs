use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyvec::{MultiIndex, Poly, PolyVec};
use crate::scalar::{self, RVector, Rational};
use crate::validation::ClosedForm;

/// One monomial `coeff · y^exponents` of a component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub exponents: MultiIndex,
}

/// A polynomial initial-value problem as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub name: String,
    pub dim: usize,
    pub t0: Rational,
    pub y0: RVector,
    pub polys: Vec<Vec<Term>>,
    pub closed_form: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coeff: String,
    exponents: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    name: String,
    dim: usize,
    t0: String,
    y0: Vec<String>,
    polys: Vec<Vec<RawTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    closed_form: Option<String>,
}

fn field_rational(text: &str, path: &str) -> Result<Rational> {
    scalar::parse_rational(text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path, message),
        other => other,
    })
}

/// Parses and validates a JSON problem file.
pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    let raw: RawProblem = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    if raw.dim == 0 {
        return Err(Error::parse("dim", "dimension must be at least 1"));
    }
    if raw.y0.len() != raw.dim {
        return Err(Error::dimension("y0", raw.dim, raw.y0.len()));
    }
    if raw.polys.len() != raw.dim {
        return Err(Error::dimension("polys", raw.dim, raw.polys.len()));
    }
    let t0 = field_rational(&raw.t0, "t0")?;
    let y0 = raw
        .y0
        .iter()
        .enumerate()
        .map(|(i, s)| field_rational(s, &format!("y0[{i}]")))
        .collect::<Result<RVector>>()?;
    let mut polys = Vec::with_capacity(raw.dim);
    for (i, comp) in raw.polys.iter().enumerate() {
        let mut seen = BTreeSet::new();
        let mut terms = Vec::with_capacity(comp.len());
        for (j, term) in comp.iter().enumerate() {
            let path = format!("polys[{i}][{j}]");
            if term.exponents.len() != raw.dim {
                return Err(Error::parse(
                    format!("{path}.exponents"),
                    format!("expected {} exponents, found {}", raw.dim, term.exponents.len()),
                ));
            }
            if !seen.insert(term.exponents.clone()) {
                return Err(Error::parse(
                    format!("{path}.exponents"),
                    format!("duplicate monomial {:?}", term.exponents),
                ));
            }
            terms.push(Term {
                coeff: field_rational(&term.coeff, &format!("{path}.coeff"))?,
                exponents: MultiIndex::new(term.exponents.clone()),
            });
        }
        polys.push(terms);
    }
    if let Some(tag) = &raw.closed_form {
        ClosedForm::from_tag(tag).map_err(|e| Error::parse("closed_form", e.to_string()))?;
    }
    Ok(ProblemSpec {
        name: raw.name,
        dim: raw.dim,
        t0,
        y0,
        polys,
        closed_form: raw.closed_form,
    })
}

impl ProblemSpec {
    /// Describes `p` term by term, in the polynomial's monomial order.
    pub fn from_system(name: &str, t0: Rational, y0: RVector, p: &PolyVec, closed_form: Option<&str>) -> Self {
        let polys = p
            .components()
            .iter()
            .map(|c| {
                c.terms()
                    .map(|(e, coeff)| Term {
                        coeff: coeff.clone(),
                        exponents: e.clone(),
                    })
                    .collect()
            })
            .collect();
        ProblemSpec {
            name: name.to_string(),
            dim: p.dim(),
            t0,
            y0,
            polys,
            closed_form: closed_form.map(str::to_string),
        }
    }

    pub fn system(&self) -> Result<PolyVec> {
        let comps = self
            .polys
            .iter()
            .map(|terms| Poly::from_terms(self.dim, terms.iter().map(|t| (t.coeff.clone(), t.exponents.clone()))))
            .collect::<Result<Vec<_>>>()?;
        PolyVec::new(comps)
    }

    pub fn to_json(&self) -> String {
        let raw = RawProblem {
            name: self.name.clone(),
            dim: self.dim,
            t0: self.t0.to_string(),
            y0: self.y0.iter().map(ToString::to_string).collect(),
            polys: self
                .polys
                .iter()
                .map(|terms| {
                    terms
                        .iter()
                        .map(|t| RawTerm {
                            coeff: t.coeff.to_string(),
                            exponents: t.exponents.exponents().to_vec(),
                        })
                        .collect()
                })
                .collect(),
            closed_form: self.closed_form.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }
}
