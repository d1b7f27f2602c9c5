//! Exact exhaustive counting: congruence solutions of the expanded system,
//! certified-seed classes, the lifting growth bound, and a desk-scale
//! rational-point count.
//!
//! All counts are computed by partitioned brute force over residue vectors in
//! mixed-radix little-endian order. Partial results merge additively (or by
//! set union for class counts), so every report is identical for any worker
//! count.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::budget::Budget;
use crate::enumerate::{self, ModSystem};
use crate::error::{Error, Result};
use crate::forms::multilinear::DerivativeTable;
use crate::forms::{expand_multilinear, FormSystem, MultilinearSystem};
use crate::linalg::IntMatrix;

/// Result of one exhaustive count: the quantity's name and parameters, the
/// exact count, and how many states the enumeration visited.
///
/// Wall time is measured but excluded from the serialized form so reports
/// stay byte-identical across machines and worker counts.
#[derive(Clone, Debug)]
pub struct CountReport {
    pub quantity: String,
    pub parameters: BTreeMap<String, u64>,
    pub count: BigUint,
    pub states_enumerated: u64,
    pub wall_time: Duration,
}

impl CountReport {
    pub fn to_document(&self) -> CountReportDoc {
        CountReportDoc {
            quantity: self.quantity.clone(),
            parameters: self.parameters.clone(),
            count: self.count.to_string(),
            states_enumerated: self.states_enumerated,
        }
    }
}

/// Wire format of a [`CountReport`]; the count travels as a decimal string.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountReportDoc {
    pub quantity: String,
    pub parameters: BTreeMap<String, u64>,
    pub count: String,
    pub states_enumerated: u64,
}

fn params(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// The number of residue vectors modulo `p^l` on which every component of
/// the expanded system vanishes modulo `p^l`. `l = 0` returns 1: everything
/// vanishes modulo 1.
pub fn gamma_m(
    fs: &FormSystem,
    m: u32,
    p: u64,
    l: u32,
    budget: &Budget,
    workers: usize,
) -> Result<CountReport> {
    let sys = expand_multilinear(fs, m, budget)?;
    gamma_of_system(&sys, p, l, budget, workers)
}

/// [`gamma_m`] on an already-expanded system.
pub fn gamma_of_system(
    sys: &MultilinearSystem,
    p: u64,
    l: u32,
    budget: &Budget,
    workers: usize,
) -> Result<CountReport> {
    arith::require_prime(p)?;
    let start = Instant::now();
    let ms = sys.variable_count();
    let parameters = params(&[("p", p), ("l", u64::from(l)), ("m", u64::from(sys.m()))]);
    if l == 0 {
        return Ok(CountReport {
            quantity: "gamma".into(),
            parameters,
            count: BigUint::one(),
            states_enumerated: 1,
            wall_time: start.elapsed(),
        });
    }
    let states = BigUint::from(p).pow(l * ms as u32);
    let total = budget.admit_states("congruence count", &states)?;
    let modulus = pow_u64(p, l);
    let compiled = ModSystem::compile(sys.components(), modulus);
    let counts = enumerate::partitioned(total, workers, |range| {
        let mut digits = vec![0u64; ms];
        let mut count = 0u64;
        let mut index = range.start;
        if index < range.end {
            enumerate::decode_le(index, modulus, &mut digits);
        }
        while index < range.end {
            if compiled.vanishes(&digits) {
                count += 1;
            }
            enumerate::increment_le(&mut digits, modulus);
            index += 1;
        }
        count
    });
    let count: u64 = counts.into_iter().sum();
    Ok(CountReport {
        quantity: "gamma".into(),
        parameters,
        count: BigUint::from(count),
        states_enumerated: total,
        wall_time: start.elapsed(),
    })
}

/// The number of certified-seed classes at level `2*sigma - 1 + nu`: residue
/// vectors solving the congruences whose minor at the given columns has
/// determinant valuation exactly `sigma - 1`, counted up to coincidence of
/// the transformed vectors `(p^(sigma-1) * a_minor, a_rest)`.
pub fn count_m(
    sys: &MultilinearSystem,
    p: u64,
    sigma: u32,
    nu: u32,
    minor_columns: &[usize],
    budget: &Budget,
    workers: usize,
) -> Result<CountReport> {
    arith::require_prime(p)?;
    if sigma < 1 {
        return Err(Error::Precondition("sigma must be at least 1".into()));
    }
    let ms = sys.variable_count();
    let rr = sys.row_count();
    validate_minor_columns(minor_columns, rr, ms)?;
    let start = Instant::now();

    let level = 2 * sigma - 1 + nu;
    let states = BigUint::from(p).pow(level * ms as u32);
    let total = budget.admit_states("seed class count", &states)?;
    let modulus = pow_u64(p, level);
    let compiled = ModSystem::compile(sys.components(), modulus);
    let table = DerivativeTable::new(sys);
    let sigma_modulus = BigInt::from(p).pow(sigma);
    let shift = pow_u64(p, sigma - 1); // fits: sigma - 1 < level
    let free_columns: Vec<usize> = (0..ms).filter(|c| !minor_columns.contains(c)).collect();

    let sets = enumerate::partitioned(total, workers, |range| -> Result<BTreeSet<Vec<u64>>> {
        let mut classes = BTreeSet::new();
        let mut digits = vec![0u64; ms];
        let mut index = range.start;
        if index < range.end {
            enumerate::decode_le(index, modulus, &mut digits);
        }
        while index < range.end {
            if compiled.vanishes(&digits) {
                let point: Vec<BigInt> = digits.iter().map(|&d| BigInt::from(d)).collect();
                let minor = table.eval_columns(&point, minor_columns)?;
                if minor_qualifies(&minor, &sigma_modulus, p, sigma)? {
                    let mut key = Vec::with_capacity(ms);
                    for &c in minor_columns {
                        key.push(mulmod(digits[c], shift, modulus));
                    }
                    for &c in &free_columns {
                        key.push(digits[c]);
                    }
                    classes.insert(key);
                }
            }
            enumerate::increment_le(&mut digits, modulus);
            index += 1;
        }
        Ok(classes)
    });
    let mut merged = BTreeSet::new();
    for set in sets {
        merged.extend(set?);
    }
    Ok(CountReport {
        quantity: "M".into(),
        parameters: params(&[
            ("p", p),
            ("sigma", u64::from(sigma)),
            ("nu", u64::from(nu)),
            ("m", u64::from(sys.m())),
            ("level", u64::from(level)),
        ]),
        count: BigUint::from(merged.len()),
        states_enumerated: total,
        wall_time: start.elapsed(),
    })
}

fn minor_qualifies(minor: &IntMatrix, sigma_modulus: &BigInt, p: u64, sigma: u32) -> Result<bool> {
    let mut reduced = IntMatrix::zero(minor.rows(), minor.cols());
    for r in 0..minor.rows() {
        for c in 0..minor.cols() {
            reduced.set(r, c, minor.get(r, c).mod_floor(sigma_modulus));
        }
    }
    let det = reduced.determinant()?.mod_floor(sigma_modulus);
    Ok(matches!(arith::valuation(&det, p), Some(v) if v == sigma - 1))
}

pub(crate) fn validate_minor_columns(columns: &[usize], rr: usize, ms: usize) -> Result<()> {
    if columns.len() != rr {
        return Err(Error::Precondition(format!(
            "minor column set has {} entries, the system has Rr = {rr} rows",
            columns.len()
        )));
    }
    if columns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "minor columns must be strictly ascending".into(),
        ));
    }
    if columns.last().is_some_and(|&c| c >= ms) {
        return Err(Error::Precondition(format!(
            "minor column index out of range for ms = {ms}"
        )));
    }
    Ok(())
}

/// One row of the growth-bound verification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftingBoundRow {
    pub nu: u32,
    pub count: String,
    pub bound: String,
    pub holds: bool,
}

/// Exact check of `M(sigma, nu) >= p^((ms-Rr) nu) * M(sigma, 0)` for
/// `nu = 0..=nu_max`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftingBoundReport {
    pub p: u64,
    pub sigma: u32,
    pub minor_columns: Vec<usize>,
    pub rows: Vec<LiftingBoundRow>,
    pub holds: bool,
    pub truncated: bool,
}

/// Verifies the lifting growth bound level by level. When a level exceeds the
/// budget the report is returned truncated at the last affordable level.
pub fn verify_lifting_bound(
    sys: &MultilinearSystem,
    p: u64,
    sigma: u32,
    nu_max: u32,
    minor_columns: &[usize],
    budget: &Budget,
    workers: usize,
) -> Result<LiftingBoundReport> {
    let ms = sys.variable_count();
    let rr = sys.row_count();
    if ms < rr {
        return Err(Error::Precondition(format!(
            "the growth bound requires ms >= Rr, got ms = {ms}, Rr = {rr}"
        )));
    }
    let base = count_m(sys, p, sigma, 0, minor_columns, budget, workers)?;
    let m0 = base.count.clone();
    let mut rows = vec![LiftingBoundRow {
        nu: 0,
        count: m0.to_string(),
        bound: m0.to_string(),
        holds: true,
    }];
    let mut truncated = false;
    for nu in 1..=nu_max {
        match count_m(sys, p, sigma, nu, minor_columns, budget, workers) {
            Ok(report) => {
                let bound = BigUint::from(p).pow((ms - rr) as u32 * nu) * &m0;
                rows.push(LiftingBoundRow {
                    nu,
                    count: report.count.to_string(),
                    bound: bound.to_string(),
                    holds: report.count >= bound,
                });
            }
            Err(Error::BudgetExceeded { .. }) => {
                truncated = true;
                break;
            }
            Err(other) => return Err(other),
        }
    }
    let holds = rows.iter().all(|r| r.holds);
    Ok(LiftingBoundReport {
        p,
        sigma,
        minor_columns: minor_columns.to_vec(),
        rows,
        holds,
        truncated,
    })
}

/// The number of integer vectors with all coordinates in `[-radius, radius]`
/// on which every component of the expanded system vanishes over the
/// integers. Diagnostic only; the counting is plain brute force.
pub fn count_rational_points(
    fs: &FormSystem,
    m: u32,
    radius: u64,
    budget: &Budget,
    workers: usize,
) -> Result<CountReport> {
    let sys = expand_multilinear(fs, m, budget)?;
    let start = Instant::now();
    let ms = sys.variable_count();
    let side = 2 * radius + 1;
    let states = BigUint::from(side).pow(ms as u32);
    let total = budget.admit_states("rational point count", &states)?;
    let counts = enumerate::partitioned(total, workers, |range| -> Result<u64> {
        let mut digits = vec![0u64; ms];
        let mut count = 0u64;
        let mut index = range.start;
        if index < range.end {
            enumerate::decode_le(index, side, &mut digits);
        }
        while index < range.end {
            let point: Vec<BigInt> = digits
                .iter()
                .map(|&d| BigInt::from(d as i64 - radius as i64))
                .collect();
            if sys.evaluate(&point)?.iter().all(Zero::is_zero) {
                count += 1;
            }
            enumerate::increment_le(&mut digits, side);
            index += 1;
        }
        Ok(count)
    });
    let mut count = 0u64;
    for c in counts {
        count += c?;
    }
    Ok(CountReport {
        quantity: "rational_points".into(),
        parameters: params(&[("m", u64::from(m)), ("radius", radius)]),
        count: BigUint::from(count),
        states_enumerated: total,
        wall_time: start.elapsed(),
    })
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_u64(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp)
        .expect("modulus fits u64 whenever the state count passed the budget")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::form_from_terms;

    fn three_cubes() -> FormSystem {
        form_from_terms(3, 3, &[(1, &[3, 0, 0]), (1, &[0, 3, 0]), (1, &[0, 0, 3])]).unwrap()
    }

    fn cube_minus_two_cubes() -> FormSystem {
        form_from_terms(3, 2, &[(1, &[3, 0]), (-2, &[0, 3])]).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let budget = Budget::default();
        // solutions of x1 + x2 + x3 = 0 mod 2
        let report = gamma_m(&three_cubes(), 1, 2, 1, &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::from(4u32));
        assert_eq!(report.states_enumerated, 8);

        // l = 0 convention
        let report = gamma_m(&three_cubes(), 1, 2, 0, &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::one());

        // cube map bijective mod 5
        let report = gamma_m(&cube_minus_two_cubes(), 1, 5, 1, &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::from(5u32));
    }

    #[test]
    fn gamma_is_worker_independent() {
        let budget = Budget::default();
        let docs: Vec<String> = [1usize, 2, 8]
            .iter()
            .map(|&w| {
                let r = gamma_m(&cube_minus_two_cubes(), 1, 5, 2, &budget, w).unwrap();
                serde_json::to_string(&r.to_document()).unwrap()
            })
            .collect();
        assert_eq!(docs[0], docs[1]);
        assert_eq!(docs[0], docs[2]);
    }

    #[test]
    fn gamma_budget_guard() {
        let tiny = Budget::with_max_states(100);
        assert!(matches!(
            gamma_m(&three_cubes(), 1, 5, 2, &tiny, 1),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn count_m_examples() {
        let budget = Budget::default();
        let sys = expand_multilinear(&cube_minus_two_cubes(), 1, &budget).unwrap();
        // sigma = 1, nu = 0: exactly the four seeds
        let report = count_m(&sys, 5, 1, 0, &[0], &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::from(4u32));
        // the paper example uses the other column; same count here
        let report = count_m(&sys, 5, 1, 0, &[1], &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::from(4u32));
        // nu = 1: enumeration mod 25
        let report = count_m(&sys, 5, 1, 1, &[0], &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::from(20u32));

        // F = x^3 at p = 3: no nonsingular approximate zeros at all
        let fs = form_from_terms(3, 1, &[(1, &[3])]).unwrap();
        let sys = expand_multilinear(&fs, 1, &budget).unwrap();
        let report = count_m(&sys, 3, 1, 0, &[0], &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::zero());
    }

    #[test]
    fn count_m_validates_columns() {
        let budget = Budget::default();
        let sys = expand_multilinear(&cube_minus_two_cubes(), 1, &budget).unwrap();
        assert!(count_m(&sys, 5, 1, 0, &[0, 1], &budget, 1).is_err());
        assert!(count_m(&sys, 5, 1, 0, &[2], &budget, 1).is_err());
        assert!(count_m(&sys, 4, 1, 0, &[0], &budget, 1).is_err()); // p not prime
    }

    #[test]
    fn lifting_bound_examples() {
        let budget = Budget::default();
        let sys = expand_multilinear(&cube_minus_two_cubes(), 1, &budget).unwrap();
        let report = verify_lifting_bound(&sys, 5, 1, 2, &[0], &budget, 1).unwrap();
        assert!(report.holds);
        assert!(!report.truncated);
        assert_eq!(report.rows.len(), 3);
        // nu = 0 row holds with equality
        assert_eq!(report.rows[0].count, report.rows[0].bound);
        // counts: 4, 20, 100
        assert_eq!(report.rows[1].count, "20");
        assert_eq!(report.rows[1].bound, "20");
        assert_eq!(report.rows[2].bound, "100");

        // vacuous case: M = 0 on both sides
        let fs = form_from_terms(3, 1, &[(1, &[3])]).unwrap();
        let sys = expand_multilinear(&fs, 1, &budget).unwrap();
        let report = verify_lifting_bound(&sys, 3, 1, 1, &[0], &budget, 1).unwrap();
        assert!(report.holds);
        assert_eq!(report.rows[1].count, "0");
    }

    #[test]
    fn lifting_bound_truncates_on_budget() {
        let sys = expand_multilinear(&cube_minus_two_cubes(), 1, &Budget::default()).unwrap();
        let small = Budget::with_max_states(700); // mod 25 fits (625), mod 125 does not
        let report = verify_lifting_bound(&sys, 5, 1, 2, &[0], &small, 1).unwrap();
        assert!(report.truncated);
        assert_eq!(report.rows.len(), 2);
        assert!(report.holds);
    }

    #[test]
    fn rational_point_examples() {
        let budget = Budget::default();
        // x1^3 + x2^3 = 0: exactly the line x2 = -x1
        let fs = form_from_terms(3, 2, &[(1, &[3, 0]), (1, &[0, 3])]).unwrap();
        let report = count_rational_points(&fs, 1, 10, &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::from(21u32));
        assert_eq!(report.states_enumerated, 441);

        // radius 0: the origin
        let report = count_rational_points(&fs, 1, 0, &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::one());

        // 2 is not a rational cube
        let report = count_rational_points(&cube_minus_two_cubes(), 1, 10, &budget, 1).unwrap();
        assert_eq!(report.count, BigUint::one());
    }

    #[test]
    fn report_document_shape() {
        let budget = Budget::default();
        let report = gamma_m(&three_cubes(), 1, 2, 1, &budget, 1).unwrap();
        let json = serde_json::to_string(&report.to_document()).unwrap();
        assert!(json.contains("\"count\":\"4\""));
        assert!(json.contains("\"p\":2"));
    }
}
