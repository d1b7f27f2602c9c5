//! Sparse multivariate polynomials over the integers.
//!
//! Terms are `(exponent vector, coefficient)` pairs kept sorted by exponent
//! vector with no zero coefficients and no duplicate exponents, so equality
//! is structural. All arithmetic is exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::budget::Budget;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, BigInt)>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, value: BigInt) -> Self {
        let mut p = SparsePoly::zero(nvars);
        if !value.is_zero() {
            p.terms.push((vec![0; nvars], value));
        }
        p
    }

    /// Single variable `x_var`.
    pub fn variable(nvars: usize, var: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[var] = 1;
        SparsePoly {
            nvars,
            terms: vec![(exps, BigInt::one())],
        }
    }

    /// Builds a polynomial from raw terms, merging duplicates and dropping
    /// zero coefficients.
    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (exps, coeff) in terms {
            if exps.len() != nvars {
                return Err(Error::ShapeMismatch(format!(
                    "exponent vector of length {} in a polynomial with {} variables",
                    exps.len(),
                    nvars
                )));
            }
            *map.entry(exps).or_insert_with(BigInt::zero) += coeff;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(SparsePoly {
            nvars,
            terms: map.into_iter().collect(),
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u32>, BigInt)] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree among terms, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|(e, _)| e.iter().sum::<u32>()).max()
    }

    /// Degree in the variable slice `[lo, hi)`, `None` for zero.
    pub fn degree_in_range(&self, lo: usize, hi: usize) -> Option<u32> {
        self.terms
            .iter()
            .map(|(e, _)| e[lo..hi].iter().sum::<u32>())
            .max()
    }

    pub fn eval(&self, point: &[BigInt]) -> Result<BigInt> {
        if point.len() != self.nvars {
            return Err(Error::ShapeMismatch(format!(
                "point of length {} for a polynomial in {} variables",
                point.len(),
                self.nvars
            )));
        }
        let mut acc = BigInt::zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term *= x.pow(e);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn partial_derivative(&self, var: usize) -> SparsePoly {
        let terms = self.terms.iter().filter_map(|(exps, coeff)| {
            let e = exps[var];
            if e == 0 {
                return None;
            }
            let mut new_exps = exps.clone();
            new_exps[var] = e - 1;
            Some((new_exps, coeff * BigInt::from(e)))
        });
        SparsePoly::from_terms(self.nvars, terms).expect("derivative preserves arity")
    }

    pub fn add(&self, other: &SparsePoly) -> Result<SparsePoly> {
        if self.nvars != other.nvars {
            return Err(Error::ShapeMismatch(
                "adding polynomials with different variable counts".into(),
            ));
        }
        SparsePoly::from_terms(self.nvars, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn scaled(&self, factor: &BigInt) -> SparsePoly {
        if factor.is_zero() {
            return SparsePoly::zero(self.nvars);
        }
        SparsePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * factor))
                .collect(),
        }
    }

    pub fn mul(&self, other: &SparsePoly, budget: &Budget, what: &str) -> Result<SparsePoly> {
        if self.nvars != other.nvars {
            return Err(Error::ShapeMismatch(
                "multiplying polynomials with different variable counts".into(),
            ));
        }
        let mut map: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *map.entry(exps).or_insert_with(BigInt::zero) += ca * cb;
                budget.admit_terms(what, map.len())?;
            }
        }
        map.retain(|_, c| !c.is_zero());
        Ok(SparsePoly {
            nvars: self.nvars,
            terms: map.into_iter().collect(),
        })
    }

    /// `self^k` by direct multinomial expansion over the terms.
    pub fn pow(&self, k: u32, budget: &Budget, what: &str) -> Result<SparsePoly> {
        if k == 0 {
            return Ok(SparsePoly::constant(self.nvars, BigInt::one()));
        }
        let mut map: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        let t = self.terms.len();
        if t == 0 {
            return Ok(SparsePoly::zero(self.nvars));
        }
        // compositions of k into t nonnegative parts
        let mut parts = vec![0u32; t];
        parts[0] = k;
        loop {
            let mult = BigInt::from(crate::arith::multinomial(&parts));
            let mut exps = vec![0u32; self.nvars];
            let mut coeff = mult;
            for (slot, &e) in parts.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let (term_exps, term_coeff) = &self.terms[slot];
                for (acc, &te) in exps.iter_mut().zip(term_exps) {
                    *acc += te * e;
                }
                coeff *= term_coeff.pow(e);
            }
            *map.entry(exps).or_insert_with(BigInt::zero) += coeff;
            budget.admit_terms(what, map.len())?;

            // next composition: move a unit from the leftmost positive slot
            let first = match parts.iter().position(|&x| x > 0) {
                Some(i) => i,
                None => break,
            };
            if first == t - 1 {
                break;
            }
            let head = parts[first];
            parts[first] = 0;
            parts[0] = head - 1;
            parts[first + 1] += 1;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(SparsePoly {
            nvars: self.nvars,
            terms: map.into_iter().collect(),
        })
    }
}

/// Expands `sum_terms c * prod_n subs[n]^(e_n)`, i.e. the image of a
/// polynomial (given by raw terms in `source_vars` variables) under the
/// substitution `x_n -> subs[n]`.
pub fn substitute(
    source_terms: &[(Vec<u32>, BigInt)],
    subs: &[SparsePoly],
    budget: &Budget,
    what: &str,
) -> Result<SparsePoly> {
    let target_vars = subs
        .first()
        .map(SparsePoly::nvars)
        .ok_or_else(|| Error::ShapeMismatch("substitution with no variables".into()))?;
    if subs.iter().any(|s| s.nvars() != target_vars) {
        return Err(Error::ShapeMismatch(
            "substitution polynomials have mixed variable counts".into(),
        ));
    }
    let mut acc = SparsePoly::zero(target_vars);
    for (exps, coeff) in source_terms {
        if exps.len() != subs.len() {
            return Err(Error::ShapeMismatch(format!(
                "term with {} exponents under a substitution of {} variables",
                exps.len(),
                subs.len()
            )));
        }
        let mut term_poly = SparsePoly::constant(target_vars, coeff.clone());
        for (n, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let factor = subs[n].pow(e, budget, what)?;
            term_poly = term_poly.mul(&factor, budget, what)?;
            if term_poly.is_zero() {
                break;
            }
        }
        acc = acc.add(&term_poly)?;
        budget.admit_terms(what, acc.term_count())?;
    }
    Ok(acc)
}
