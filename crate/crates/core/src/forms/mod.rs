//! Systems of integer forms: parsing, canonical representation, evaluation,
//! and the multilinear expansion used by everything downstream.
//!
//! A [`FormSystem`] holds `R` homogeneous polynomials of common degree `d` in
//! `s` variables, each stored as a canonical sparse list of monomials with
//! arbitrary-precision integer coefficients. The JSON schema is
//!
//! ```text
//! {"degree": d, "variables": s, "forms": [[{"exponents": [..], "coefficient": "123"}, ..], ..]}
//! ```
//!
//! with coefficients as decimal strings so no precision is lost in transit
//! (plain JSON integers are also accepted on input).

pub(crate) mod multilinear;

pub use multilinear::{
    expand_multilinear, multi_index_set, JacobianEvaluation, MultiIndex, MultilinearSystem,
};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::SparsePoly;

/// One term of a form: a coefficient times a product of variable powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coefficient: BigInt,
}

impl Monomial {
    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// A system of `R` integer forms of common degree `d` in `s` variables.
///
/// Invariants: every monomial has total degree exactly `d`, monomials within
/// a form are merged and sorted by exponent vector, and `R >= 1`. A member
/// form may be identically zero (restriction to a subspace can collapse a
/// form), but the system itself always contains at least one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSystem {
    degree: u32,
    variables: usize,
    forms: Vec<SparsePoly>,
}

impl FormSystem {
    pub fn new(degree: u32, variables: usize, forms: Vec<Vec<Monomial>>) -> Result<Self> {
        if degree < 1 {
            return Err(Error::Parse("degree must be at least 1".into()));
        }
        if variables < 1 {
            return Err(Error::Parse("variable count must be at least 1".into()));
        }
        if forms.is_empty() {
            return Err(Error::Parse(
                "a form system must contain at least one form".into(),
            ));
        }
        let mut canonical = Vec::with_capacity(forms.len());
        for (rho, monomials) in forms.iter().enumerate() {
            for (k, mono) in monomials.iter().enumerate() {
                if mono.exponents.len() != variables {
                    return Err(Error::Parse(format!(
                        "form {}, monomial {}: exponent vector has length {}, expected {}",
                        rho + 1,
                        k + 1,
                        mono.exponents.len(),
                        variables
                    )));
                }
                if mono.total_degree() != degree {
                    return Err(Error::Parse(format!(
                        "form {}, monomial {}: total degree {} differs from the system degree {}",
                        rho + 1,
                        k + 1,
                        mono.total_degree(),
                        degree
                    )));
                }
            }
            canonical.push(SparsePoly::from_terms(
                variables,
                monomials
                    .iter()
                    .map(|m| (m.exponents.clone(), m.coefficient.clone())),
            )?);
        }
        Ok(FormSystem {
            degree,
            variables,
            forms: canonical,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn form_count(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[SparsePoly] {
        &self.forms
    }

    pub fn form(&self, rho: usize) -> &SparsePoly {
        &self.forms[rho]
    }

    /// The monomial list of form `rho`, in canonical order.
    pub fn monomials(&self, rho: usize) -> Vec<Monomial> {
        self.forms[rho]
            .terms()
            .iter()
            .map(|(e, c)| Monomial {
                exponents: e.clone(),
                coefficient: c.clone(),
            })
            .collect()
    }

    /// Evaluates all `R` forms at an integer point.
    pub fn evaluate(&self, point: &[BigInt]) -> Result<Vec<BigInt>> {
        self.forms.iter().map(|f| f.eval(point)).collect()
    }

    pub fn to_document(&self) -> FormSystemDoc {
        FormSystemDoc {
            degree: self.degree,
            variables: self.variables,
            forms: (0..self.forms.len())
                .map(|rho| {
                    self.monomials(rho)
                        .into_iter()
                        .map(|m| MonomialDoc {
                            exponents: m.exponents,
                            coefficient: CoefficientRepr::Text(m.coefficient.to_string()),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }
}

/// Parses a form-system document, canonicalizing monomial order and merging
/// duplicate exponent vectors.
pub fn parse_form_system(document: &str) -> Result<FormSystem> {
    let doc: FormSystemDoc =
        serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_form_system()
}

/// Serde mirror of the on-disk schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormSystemDoc {
    pub degree: u32,
    pub variables: usize,
    pub forms: Vec<Vec<MonomialDoc>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonomialDoc {
    pub exponents: Vec<u32>,
    pub coefficient: CoefficientRepr,
}

/// Decimal-string coefficient; bare JSON integers are tolerated on input.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientRepr {
    Text(String),
    Number(i64),
}

impl CoefficientRepr {
    pub fn to_bigint(&self) -> Result<BigInt> {
        match self {
            CoefficientRepr::Text(s) => s
                .parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("invalid integer coefficient {s:?}"))),
            CoefficientRepr::Number(n) => Ok(BigInt::from(*n)),
        }
    }
}

impl FormSystemDoc {
    pub fn into_form_system(self) -> Result<FormSystem> {
        let forms = self
            .forms
            .into_iter()
            .map(|monos| {
                monos
                    .into_iter()
                    .map(|m| {
                        Ok(Monomial {
                            exponents: m.exponents,
                            coefficient: m.coefficient.to_bigint()?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FormSystem::new(self.degree, self.variables, forms)
    }
}

/// Convenience constructor used throughout the tests and the guide: builds a
/// single-form system from `(coefficient, exponents)` pairs.
pub fn form_from_terms(
    degree: u32,
    variables: usize,
    terms: &[(i64, &[u32])],
) -> Result<FormSystem> {
    let monomials = terms
        .iter()
        .map(|(c, e)| Monomial {
            exponents: e.to_vec(),
            coefficient: BigInt::from(*c),
        })
        .collect();
    FormSystem::new(degree, variables, vec![monomials])
}

impl std::fmt::Display for FormSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (rho, form) in self.forms.iter().enumerate() {
            if rho > 0 {
                writeln!(f)?;
            }
            write!(f, "F({})", rho + 1)?;
            write!(f, " =")?;
            if form.is_zero() {
                write!(f, " 0")?;
                continue;
            }
            for (k, (exps, coeff)) in form.terms().iter().enumerate() {
                if k == 0 {
                    write!(f, " {coeff}")?;
                } else if coeff >= &BigInt::zero() {
                    write!(f, " + {coeff}")?;
                } else {
                    write!(f, " - {}", -coeff)?;
                }
                for (n, &e) in exps.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => write!(f, "*x{}", n + 1)?,
                        _ => write!(f, "*x{}^{}", n + 1, e)?,
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_CUBES: &str = r#"{
        "degree": 3, "variables": 3,
        "forms": [[
            {"exponents": [3,0,0], "coefficient": "1"},
            {"exponents": [0,3,0], "coefficient": "1"},
            {"exponents": [0,0,3], "coefficient": "1"}
        ]]
    }"#;

    #[test]
    fn parses_three_cubes() {
        let fs = parse_form_system(THREE_CUBES).unwrap();
        assert_eq!(fs.degree(), 3);
        assert_eq!(fs.variables(), 3);
        assert_eq!(fs.form_count(), 1);
        assert_eq!(fs.monomials(0).len(), 3);
    }

    #[test]
    fn rejects_mixed_degree() {
        let doc = r#"{
            "degree": 3, "variables": 3,
            "forms": [[{"exponents": [2,0,0], "coefficient": "1"}]]
        }"#;
        let err = parse_form_system(doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("form 1, monomial 1"), "got: {msg}");
        assert!(msg.contains("degree 2"), "got: {msg}");
    }

    #[test]
    fn rejects_wrong_exponent_length() {
        let doc = r#"{
            "degree": 3, "variables": 3,
            "forms": [[{"exponents": [3,0], "coefficient": "1"}]]
        }"#;
        let err = parse_form_system(doc).unwrap_err();
        assert!(err.to_string().contains("length 2"));
    }

    #[test]
    fn rejects_empty_system() {
        let doc = r#"{"degree": 3, "variables": 2, "forms": []}"#;
        let err = parse_form_system(doc).unwrap_err();
        assert!(err.to_string().contains("at least one form"));
    }

    #[test]
    fn two_cubics_in_two_variables() {
        let doc = r#"{
            "degree": 3, "variables": 2,
            "forms": [
                [{"exponents": [3,0], "coefficient": "1"}],
                [{"exponents": [0,3], "coefficient": 2}]
            ]
        }"#;
        let fs = parse_form_system(doc).unwrap();
        assert_eq!(fs.degree(), 3);
        assert_eq!(fs.variables(), 2);
        assert_eq!(fs.form_count(), 2);
    }

    #[test]
    fn merges_duplicate_monomials() {
        let doc = r#"{
            "degree": 2, "variables": 1,
            "forms": [[
                {"exponents": [2], "coefficient": "3"},
                {"exponents": [2], "coefficient": "-3"}
            ]]
        }"#;
        let fs = parse_form_system(doc).unwrap();
        assert!(fs.form(0).is_zero());
    }

    #[test]
    fn json_round_trip() {
        let fs = parse_form_system(THREE_CUBES).unwrap();
        let again = parse_form_system(&fs.to_json()).unwrap();
        assert_eq!(fs, again);
    }

    #[test]
    fn evaluates_forms() {
        let fs = parse_form_system(THREE_CUBES).unwrap();
        let vals = fs
            .evaluate(&[BigInt::from(1), BigInt::from(-1), BigInt::from(0)])
            .unwrap();
        assert_eq!(vals, vec![BigInt::zero()]);
    }
}
