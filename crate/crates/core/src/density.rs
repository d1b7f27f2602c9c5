//! Local densities and the explicit constant calculators.
//!
//! The p-adic density of linear-space solutions is approached through the
//! sequence `c_i = p^(i(Rr-ms)) * Gamma_m(p^i)`; its limit, when the ambient
//! hypotheses hold, is the local factor of the singular series. The same
//! quantity has an exponential-sum expression, evaluated here along two
//! mutually cross-checking routes: honest floating-point enumeration of the
//! character sums, and an exact telescoping evaluation that stays in rational
//! arithmetic. Divergent traces are first-class outputs: the trace carries a
//! convergence flag, it is never asserted.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::budget::Budget;
use crate::counting::gamma_of_system;
use crate::enumerate::{self, ModSystem};
use crate::error::{Error, Result};
use crate::forms::{expand_multilinear, FormSystem};

/// Advertised absolute accuracy of the floating-point exponential-sum route.
pub const EXPSUM_FLOAT_TOLERANCE: f64 = 1e-6;

/// The sequence of local-density approximants `c_0, .., c_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityTrace {
    pub p: u64,
    pub m: u32,
    /// Exact rationals `c_i = p^(i(Rr-ms)) * Gamma_m(p^i)`, starting at
    /// `c_0 = 1`.
    pub terms: Vec<BigRational>,
    /// Whether the last two computed terms agree.
    pub converged: bool,
    /// Set when the level budget ran out before `i_max`.
    pub truncated: bool,
}

impl DensityTrace {
    pub fn to_document(&self) -> DensityTraceDoc {
        DensityTraceDoc {
            p: self.p,
            m: self.m,
            terms: self.terms.iter().map(RationalDoc::from_rational).collect(),
            converged: self.converged,
            truncated: self.truncated,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalDoc {
    pub num: String,
    pub den: String,
}

impl RationalDoc {
    pub fn from_rational(q: &BigRational) -> Self {
        RationalDoc {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityTraceDoc {
    pub p: u64,
    pub m: u32,
    pub terms: Vec<RationalDoc>,
    pub converged: bool,
    pub truncated: bool,
}

/// `c_i = p^(i(Rr-ms)) * Gamma_m(p^i)` as an exact rational.
fn scaled_gamma(gamma: &BigUint, p: u64, i: u32, rr: usize, ms: usize) -> BigRational {
    let num = BigInt::from(gamma.clone()) * BigInt::from(p).pow(i * rr as u32);
    let den = BigInt::from(p).pow(i * ms as u32);
    BigRational::new(num, den)
}

/// The density trace up to level `i_max`. Levels that exceed the enumeration
/// budget truncate the trace (flagged) rather than failing, so partial
/// information on large instances survives.
pub fn chi_trace(
    fs: &FormSystem,
    m: u32,
    p: u64,
    i_max: u32,
    budget: &Budget,
    workers: usize,
) -> Result<DensityTrace> {
    arith::require_prime(p)?;
    let sys = expand_multilinear(fs, m, budget)?;
    let rr = sys.row_count();
    let ms = sys.variable_count();
    let mut terms = Vec::with_capacity(i_max as usize + 1);
    let mut truncated = false;
    for i in 0..=i_max {
        match gamma_of_system(&sys, p, i, budget, workers) {
            Ok(report) => terms.push(scaled_gamma(&report.count, p, i, rr, ms)),
            Err(Error::BudgetExceeded { .. }) if i > 0 => {
                truncated = true;
                break;
            }
            Err(other) => return Err(other),
        }
    }
    let converged = terms.len() >= 2 && terms[terms.len() - 1] == terms[terms.len() - 2];
    Ok(DensityTrace {
        p,
        m,
        terms,
        converged,
        truncated,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpSumMode {
    /// Enumerate residue vectors and primitive character vectors, summing
    /// complex exponentials in `f64`.
    Float,
    /// Evaluate the primitive sums by inclusion-exclusion on full sums,
    /// exactly; the partial sum telescopes to `p^(L(Rr-ms)) * Gamma_m(p^L)`.
    ExactTelescoping,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExpSumValue {
    Float(f64),
    Exact(BigRational),
}

/// A partial sum of the exponential-sum expression for the local density.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpSumPartial {
    pub p: u64,
    pub m: u32,
    pub levels: u32,
    pub value: ExpSumValue,
}

impl ExpSumPartial {
    pub fn to_document(&self) -> ExpSumDoc {
        match &self.value {
            ExpSumValue::Float(v) => ExpSumDoc {
                p: self.p,
                m: self.m,
                levels: self.levels,
                mode: "float".into(),
                value: Some(*v),
                exact: None,
                tolerance: Some(EXPSUM_FLOAT_TOLERANCE),
            },
            ExpSumValue::Exact(q) => ExpSumDoc {
                p: self.p,
                m: self.m,
                levels: self.levels,
                mode: "exact-telescoping".into(),
                value: None,
                exact: Some(RationalDoc::from_rational(q)),
                tolerance: None,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpSumDoc {
    pub p: u64,
    pub m: u32,
    pub levels: u32,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<RationalDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Partial sums `sum_{l=0}^{L}` of the exponential-sum expression for the
/// local density.
///
/// A vector `u` of character indices counts as primitive when not all of its
/// components are divisible by `p`; the level-`l` inner sum runs over exactly
/// those `u`. The float route enumerates everything (sequentially; the cost
/// is `p^(l(ms+Rr))` states per level). The exact route replaces each
/// primitive sum by the difference of two full sums, which collapses to a
/// closed rational form per level.
pub fn chi_expsum_partial(
    fs: &FormSystem,
    m: u32,
    p: u64,
    levels: u32,
    mode: ExpSumMode,
    budget: &Budget,
    workers: usize,
) -> Result<ExpSumPartial> {
    arith::require_prime(p)?;
    let sys = expand_multilinear(fs, m, budget)?;
    let rr = sys.row_count();
    let ms = sys.variable_count();
    match mode {
        ExpSumMode::ExactTelescoping => {
            // term_0 = 1; term_l = c_l - c_(l-1) with
            // c_l = p^(l(Rr-ms)) * Gamma(p^l); the sum telescopes to c_L.
            let mut previous = BigRational::one();
            let mut acc = BigRational::one();
            for l in 1..=levels {
                let gamma = gamma_of_system(&sys, p, l, budget, workers)?.count;
                let current = scaled_gamma(&gamma, p, l, rr, ms);
                acc += &current - &previous;
                previous = current;
            }
            Ok(ExpSumPartial {
                p,
                m,
                levels,
                value: ExpSumValue::Exact(acc),
            })
        }
        ExpSumMode::Float => {
            let mut acc = 1.0f64; // l = 0 term
            for l in 1..=levels {
                let states = BigUint::from(p).pow(l * (ms + rr) as u32);
                budget.admit_states("exponential sum enumeration", &states)?;
                acc += float_level_sum(&sys, p, l)?;
            }
            Ok(ExpSumPartial {
                p,
                m,
                levels,
                value: ExpSumValue::Float(acc),
            })
        }
    }
}

/// The level-`l` term: `p^(-l ms) * sum_x sum_{u primitive} e(u . Phi(x) / p^l)`,
/// by direct enumeration with complex exponentials.
fn float_level_sum(sys: &crate::forms::MultilinearSystem, p: u64, l: u32) -> Result<f64> {
    let ms = sys.variable_count();
    let rr = sys.row_count();
    let modulus = p
        .checked_pow(l)
        .ok_or_else(|| Error::Precondition(format!("p^{l} does not fit 64 bits")))?;
    let compiled = ModSystem::compile(sys.components(), modulus);
    let cos_sin: Vec<(f64, f64)> = (0..modulus)
        .map(|k| {
            let angle = TAU * k as f64 / modulus as f64;
            (angle.cos(), angle.sin())
        })
        .collect();

    let x_total = checked_pow_u64(modulus, ms as u32)?;
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    let mut x_digits = vec![0u64; ms];
    for _ in 0..x_total {
        let values = compiled.values(&x_digits);
        let mut u_digits = vec![0u64; rr];
        loop {
            if u_digits.iter().any(|&u| !u.is_multiple_of(p)) {
                let mut angle_index = 0u64;
                for (u, w) in u_digits.iter().zip(&values) {
                    angle_index = (angle_index + mulmod(*u, *w, modulus)) % modulus;
                }
                let (c, s) = cos_sin[angle_index as usize];
                re += c;
                im += s;
            }
            if !enumerate::increment_le(&mut u_digits, modulus) {
                break;
            }
        }
        enumerate::increment_le(&mut x_digits, modulus);
    }
    debug_assert!(im.abs() < 1e-6 * (1.0 + re.abs()));
    let scale = (modulus as f64).powi(-(ms as i32));
    Ok(re * scale)
}

fn checked_pow_u64(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp)
        .ok_or_else(|| Error::Precondition("state space does not fit 64 bits".into()))
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// The explicit lifting constant `kappa_p = p^((1-2 sigma)(ms-Rr))`.
pub fn kappa_bound(p: u64, sigma: u32, ms: usize, rr: usize) -> Result<BigRational> {
    arith::require_prime(p)?;
    if sigma < 1 {
        return Err(Error::Precondition("sigma must be at least 1".into()));
    }
    if ms < rr {
        return Err(Error::Precondition(format!(
            "kappa requires ms >= Rr, got ms = {ms}, Rr = {rr}"
        )));
    }
    // (1 - 2 sigma) <= -1, so this is 1 / p^((2 sigma - 1)(ms - Rr)).
    let exponent = (2 * sigma - 1) * (ms - rr) as u32;
    Ok(BigRational::new(
        BigInt::one(),
        BigInt::from(p).pow(exponent),
    ))
}

/// The explicit numeric bounds attached to a parameter triple `(d, R, m)`.
///
/// All formula entries are exact integers. The comparison value uses the
/// general degree bound for the solubility threshold, keeping it a formula;
/// sharper special-case constants live in the `known_constants` table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsSheet {
    pub d: u32,
    pub forms: u32,
    pub m: u32,
    /// `r = binomial(d - 1 + m, d)`.
    pub r: BigUint,
    /// `2^(d-1) (d-1) R (R+1) + 1`.
    pub birch_h_bound: BigUint,
    /// `3 * 2^(d-1) (d-1) R (R r + 1) + 1`.
    pub linear_space_h_bound: BigUint,
    /// `(R d^2)^(2^(d-1))`.
    pub wooley_gamma_bound: BigUint,
    /// `2^(d-1) (d-1) R * gamma`, with `gamma` the Wooley bound.
    pub schmidt_comparison: BigUint,
    pub known_constants: BTreeMap<String, u64>,
}

impl BoundsSheet {
    pub fn to_document(&self) -> BoundsSheetDoc {
        BoundsSheetDoc {
            d: self.d,
            forms: self.forms,
            m: self.m,
            r: self.r.to_string(),
            birch_h_bound: self.birch_h_bound.to_string(),
            linear_space_h_bound: self.linear_space_h_bound.to_string(),
            wooley_gamma_bound: self.wooley_gamma_bound.to_string(),
            schmidt_comparison: self.schmidt_comparison.to_string(),
            known_constants: self.known_constants.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundsSheetDoc {
    pub d: u32,
    pub forms: u32,
    pub m: u32,
    pub r: String,
    pub birch_h_bound: String,
    pub linear_space_h_bound: String,
    pub wooley_gamma_bound: String,
    pub schmidt_comparison: String,
    pub known_constants: BTreeMap<String, u64>,
}

fn known_constants() -> BTreeMap<String, u64> {
    let mut table = BTreeMap::new();
    table.insert("gamma3_star_2_upper".to_string(), 131);
    table.insert(
        "heath_brown_single_nonsingular_cubic_variables".to_string(),
        10,
    );
    table.insert("dietmann_wooley_pair_of_cubics_variables".to_string(), 827);
    table
}

/// Evaluates every explicit formula at `(d, R, m)`.
///
/// Degrees above 24 are rejected: the tower exponent `2^(d-1)` makes the
/// Wooley bound too large to materialize.
pub fn bounds_sheet(d: u32, forms: u32, m: u32) -> Result<BoundsSheet> {
    if d < 1 || forms < 1 || m < 1 {
        return Err(Error::Precondition(
            "bounds sheet needs d, R, m >= 1".into(),
        ));
    }
    if d > 24 {
        return Err(Error::Precondition(
            "bounds sheet limited to d <= 24; the tower exponent explodes beyond that".into(),
        ));
    }
    let r = arith::binomial(u64::from(d - 1 + m), u64::from(d));
    let two_pow = BigUint::from(2u32).pow(d - 1);
    let big_r = BigUint::from(forms);
    let d_minus_1 = BigUint::from(d - 1);

    let birch_h_bound = &two_pow * &d_minus_1 * &big_r * BigUint::from(forms + 1) + BigUint::one();
    let linear_space_h_bound =
        BigUint::from(3u32) * &two_pow * &d_minus_1 * &big_r * (&big_r * &r + BigUint::one())
            + BigUint::one();
    let wooley_base = &big_r * BigUint::from(d) * BigUint::from(d);
    let wooley_gamma_bound = wooley_base.pow(2u32.pow(d - 1));
    let schmidt_comparison = &two_pow * &d_minus_1 * &big_r * &wooley_gamma_bound;

    Ok(BoundsSheet {
        d,
        forms,
        m,
        r,
        birch_h_bound,
        linear_space_h_bound,
        wooley_gamma_bound,
        schmidt_comparison,
        known_constants: known_constants(),
    })
}

/// The strict inequality `(R d^2)^(2^(d-1)) > 2^(d-1)(d-1)R(R+1) + R - 1`
/// between the solubility bound and the Birch-side quantity.
pub fn wooley_dominates_birch(d: u32, forms: u32) -> Result<bool> {
    let sheet = bounds_sheet(d, forms, 1)?;
    let rhs = &sheet.birch_h_bound - BigUint::one() + BigUint::from(forms) - BigUint::one();
    Ok(sheet.wooley_gamma_bound > rhs)
}
