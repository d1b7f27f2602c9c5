//! Seed search in residue rings, the p-adic order of a matrix, singularity
//! checks, the constructive lifting loop, and restriction of a system to an
//! integral subspace.
//!
//! A *seed* is an approximate zero of the expanded system modulo
//! `p^(2*sigma-1)` together with a certified square minor of the Jacobian
//! whose determinant has p-adic valuation exactly `sigma - 1`. Seeds are the
//! entry points of the lifting loop: each step extends a solution by one
//! power of `p`, solving the linearized congruence with a Smith-normal-form
//! solver and re-verifying every extension by direct evaluation, so the
//! output is self-validating.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::budget::Budget;
use crate::enumerate::{self, ModSystem};
use crate::error::{Error, Result};
use crate::forms::multilinear::DerivativeTable;
use crate::forms::{FormSystem, Monomial, MultilinearSystem};
use crate::linalg::{solve_mod_prime_power, Combinations, IntMatrix};
use crate::poly::SparsePoly;

/// `ord_p` of a matrix: one more than the smallest p-adic valuation among the
/// determinants of its maximal minors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatrixOrder {
    Finite(u32),
    Infinite,
}

/// Least `h` such that some maximal minor of `mat` has determinant not
/// divisible by `p^h`; `Infinite` when all maximal minors vanish.
///
/// Requires at least as many columns as rows.
pub fn matrix_order(mat: &IntMatrix, p: u64) -> Result<MatrixOrder> {
    arith::require_prime(p)?;
    let n = mat.rows();
    let m = mat.cols();
    if n > m {
        return Err(Error::ShapeMismatch(format!(
            "matrix order needs rows <= columns, got {n}x{m}"
        )));
    }
    let mut best: Option<u32> = None;
    for cols in Combinations::new(m, n) {
        let det = mat.select_columns(&cols)?.determinant()?;
        if let Some(v) = arith::valuation(&det, p) {
            if v == 0 {
                return Ok(MatrixOrder::Finite(1));
            }
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    Ok(match best {
        Some(v) => MatrixOrder::Finite(v + 1),
        None => MatrixOrder::Infinite,
    })
}

/// Bounded search for the global matrix order of the Jacobian: the minimum of
/// `matrix_order` over all integer points with coordinates in
/// `[-radius, radius]`.
///
/// This is an estimate only. The global order is a minimum over all of
/// `Z^(ms)`, so the value returned here is an upper bound for it.
pub fn matrix_order_box_minimum(
    sys: &MultilinearSystem,
    p: u64,
    radius: u64,
    budget: &Budget,
) -> Result<MatrixOrder> {
    arith::require_prime(p)?;
    let ms = sys.variable_count();
    if sys.row_count() > ms {
        return Err(Error::ShapeMismatch(format!(
            "Jacobian is {}x{ms}; matrix order needs rows <= columns",
            sys.row_count()
        )));
    }
    let side = 2 * radius + 1;
    let states = BigUint::from(side).pow(ms as u32);
    let total = budget.admit_states("matrix order box search", &states)?;
    let table = DerivativeTable::new(sys);
    let mut best = MatrixOrder::Infinite;
    let mut digits = vec![0u64; ms];
    for index in 0..total {
        enumerate::decode_le(index, side, &mut digits);
        let point: Vec<BigInt> = digits
            .iter()
            .map(|&d| BigInt::from(d as i64 - radius as i64))
            .collect();
        let jac = table.eval_full(&point)?;
        let order = matrix_order(&jac, p)?;
        if order < best {
            best = order;
            if best == MatrixOrder::Finite(1) {
                break;
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Singularity {
    Singular,
    Nonsingular,
}

/// Outcome of the rank test of the Jacobian modulo `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularityReport {
    /// Rank of the `Rr x ms` Jacobian over `Z/pZ`.
    pub rank: usize,
    /// Full rank `Rr` that a nonsingular point must reach.
    pub full_rank: usize,
    pub verdict: Singularity,
    /// Set when the verdict is forced structurally rather than by the point.
    pub note: Option<String>,
}

/// Ranks the Jacobian at `point` over `Z/pZ`. The point is singular exactly
/// when the rank falls below `Rr`; systems with `ms < Rr` are reported as
/// structurally singular since full rank is unreachable.
pub fn singular_rank_check(
    sys: &MultilinearSystem,
    point: &[BigInt],
    p: u64,
) -> Result<SingularityReport> {
    arith::require_prime(p)?;
    let jac = sys.jacobian_at(point)?;
    let rank = jac.matrix().rank_mod_p(p);
    let full_rank = sys.row_count();
    let note = if sys.variable_count() < full_rank {
        Some(format!(
            "structurally singular: ms = {} < Rr = {}, the Jacobian can never reach full rank",
            sys.variable_count(),
            full_rank
        ))
    } else {
        None
    };
    let verdict = if rank < full_rank {
        Singularity::Singular
    } else {
        Singularity::Nonsingular
    };
    Ok(SingularityReport {
        rank,
        full_rank,
        verdict,
        note,
    })
}

/// A certified approximate zero: residues modulo `p^(2*sigma-1)` on which all
/// components vanish, plus a column set whose minor determinant has p-adic
/// valuation exactly `sigma - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedPoint {
    pub p: u64,
    pub sigma: u32,
    /// Canonical residues in `[0, p^(2*sigma-1))`, length `ms`.
    pub residues: Vec<BigInt>,
    /// Ascending zero-based column indices of the certified minor, length `Rr`.
    pub minor_columns: Vec<usize>,
}

impl SeedPoint {
    /// Exponent of the modulus the residues live in: `2*sigma - 1`.
    pub fn level(&self) -> u32 {
        2 * self.sigma - 1
    }

    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.level())
    }

    pub fn to_document(&self) -> PointDoc {
        PointDoc {
            p: self.p,
            sigma: self.sigma,
            precision: self.level(),
            residues: self.residues.iter().map(BigInt::to_string).collect(),
            minor_columns: self.minor_columns.clone(),
        }
    }
}

/// A solution lifted to precision `N`: residues in `[0, p^N)` on which every
/// component vanishes modulo `p^N`, reducing to the originating seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAdicPoint {
    pub p: u64,
    pub precision: u32,
    pub residues: Vec<BigInt>,
    pub seed: SeedPoint,
}

impl PAdicPoint {
    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.precision)
    }

    pub fn to_document(&self) -> PointDoc {
        PointDoc {
            p: self.p,
            sigma: self.seed.sigma,
            precision: self.precision,
            residues: self.residues.iter().map(BigInt::to_string).collect(),
            minor_columns: self.seed.minor_columns.clone(),
        }
    }
}

/// Wire format shared by seeds and lifted points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointDoc {
    pub p: u64,
    pub sigma: u32,
    pub precision: u32,
    pub residues: Vec<String>,
    pub minor_columns: Vec<usize>,
}

impl PointDoc {
    pub fn parse(document: &str) -> Result<PointDoc> {
        serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))
    }

    fn residues_bigint(&self) -> Result<Vec<BigInt>> {
        self.residues
            .iter()
            .map(|s| {
                s.parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("invalid residue {s:?}")))
            })
            .collect()
    }

    pub fn into_seed(self) -> Result<SeedPoint> {
        if self.sigma < 1 {
            return Err(Error::Parse("seed sigma must be at least 1".into()));
        }
        if self.precision != 2 * self.sigma - 1 {
            return Err(Error::Parse(format!(
                "not a seed document: precision {} differs from 2*sigma-1 = {}",
                self.precision,
                2 * self.sigma - 1
            )));
        }
        let modulus = BigInt::from(self.p).pow(self.precision);
        let residues = self
            .residues_bigint()?
            .into_iter()
            .map(|r| r.mod_floor(&modulus))
            .collect();
        Ok(SeedPoint {
            p: self.p,
            sigma: self.sigma,
            residues,
            minor_columns: self.minor_columns,
        })
    }
}

/// Finds, for the smallest `sigma <= sigma_max` that admits any, every
/// residue vector modulo `p^(2*sigma-1)` on which all components vanish and
/// whose Jacobian carries a qualifying minor; the lexicographically smallest
/// qualifying column set is recorded in each seed.
///
/// Seeds are returned in enumeration order of the residue space (coordinate 0
/// fastest). The result is empty when no `sigma` up to `sigma_max` works.
pub fn find_seeds(
    sys: &MultilinearSystem,
    p: u64,
    sigma_max: u32,
    budget: &Budget,
    workers: usize,
) -> Result<Vec<SeedPoint>> {
    arith::require_prime(p)?;
    let ms = sys.variable_count();
    let rr = sys.row_count();
    if ms < rr {
        return Err(Error::Precondition(format!(
            "seed search requires ms >= Rr, got ms = {ms}, Rr = {rr}"
        )));
    }
    if sigma_max < 1 {
        return Err(Error::Precondition("sigma_max must be at least 1".into()));
    }
    for sigma in 1..=sigma_max {
        let level = 2 * sigma - 1;
        let states = BigUint::from(p).pow(level * ms as u32);
        let total = budget.admit_states("seed enumeration", &states)?;
        let modulus = pow_u64(p, level);
        let compiled = ModSystem::compile(sys.components(), modulus);
        let table = DerivativeTable::new(sys);

        let chunks = enumerate::partitioned(total, workers, |range| -> Result<Vec<SeedPoint>> {
            let mut found = Vec::new();
            let mut digits = vec![0u64; ms];
            let mut index = range.start;
            if index < range.end {
                enumerate::decode_le(index, modulus, &mut digits);
            }
            while index < range.end {
                if compiled.vanishes(&digits) {
                    let point: Vec<BigInt> = digits.iter().map(|&d| BigInt::from(d)).collect();
                    if let Some(columns) = qualifying_minor(&table, &point, p, sigma, ms, rr)? {
                        found.push(SeedPoint {
                            p,
                            sigma,
                            residues: point,
                            minor_columns: columns,
                        });
                    }
                }
                enumerate::increment_le(&mut digits, modulus);
                index += 1;
            }
            Ok(found)
        });
        let mut seeds = Vec::new();
        for chunk in chunks {
            seeds.extend(chunk?);
        }
        if !seeds.is_empty() {
            return Ok(seeds);
        }
    }
    Ok(Vec::new())
}

/// Lexicographically smallest `Rr`-column set whose minor determinant has
/// valuation exactly `sigma - 1` at `point`, if any.
fn qualifying_minor(
    table: &DerivativeTable,
    point: &[BigInt],
    p: u64,
    sigma: u32,
    ms: usize,
    rr: usize,
) -> Result<Option<Vec<usize>>> {
    let jac = table.eval_full(point)?;
    let sigma_modulus = BigInt::from(p).pow(sigma);
    // Entries only matter modulo p^sigma: whether the determinant valuation
    // is below sigma is decided there.
    let mut reduced = IntMatrix::zero(rr, ms);
    for r in 0..rr {
        for c in 0..ms {
            reduced.set(r, c, jac.get(r, c).mod_floor(&sigma_modulus));
        }
    }
    for cols in Combinations::new(ms, rr) {
        let det = reduced.select_columns(&cols)?.determinant()?;
        let det = det.mod_floor(&sigma_modulus);
        if let Some(v) = arith::valuation(&det, p) {
            if v == sigma - 1 {
                return Ok(Some(cols));
            }
        }
    }
    Ok(None)
}

/// A partially lifted solution: residues modulo `p^(2*sigma-1+nu)` carrying
/// the seed's minor certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftState {
    pub p: u64,
    pub sigma: u32,
    pub nu: u32,
    pub residues: Vec<BigInt>,
    pub minor_columns: Vec<usize>,
}

impl LiftState {
    pub fn from_seed(seed: &SeedPoint) -> LiftState {
        LiftState {
            p: seed.p,
            sigma: seed.sigma,
            nu: 0,
            residues: seed.residues.clone(),
            minor_columns: seed.minor_columns.clone(),
        }
    }

    /// Exponent of the current modulus: `2*sigma - 1 + nu`.
    pub fn level(&self) -> u32 {
        2 * self.sigma - 1 + self.nu
    }

    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.level())
    }
}

/// One lifting step: all extensions of `state` to the next power of `p`.
///
/// Extensions have the restricted shape from the lifting argument: offsets
/// are free in the minor columns and carry a factor `p^(sigma-1)` elsewhere.
/// The linearized congruence is solved exactly (Smith normal form over the
/// integers), and every candidate is re-verified by direct evaluation; a
/// failed re-verification is a solver bug and is reported as
/// [`Error::InternalInconsistency`].
///
/// With a valid certificate at least `p^(ms-Rr)` extensions exist. They are
/// returned in canonical order: free offsets enumerated little-endian,
/// minor-column solutions in ascending lexicographic order.
pub fn lift_step(
    sys: &MultilinearSystem,
    state: &LiftState,
    budget: &Budget,
) -> Result<Vec<LiftState>> {
    let p = state.p;
    arith::require_prime(p)?;
    let ms = sys.variable_count();
    let rr = sys.row_count();
    validate_certificate_shape(state, ms, rr)?;

    let level = state.level();
    let modulus = state.modulus();
    let values = sys.evaluate(&state.residues)?;
    if values.iter().any(|v| !v.mod_floor(&modulus).is_zero()) {
        return Err(Error::Precondition(format!(
            "lift input does not solve the congruences modulo {p}^{level}"
        )));
    }

    let sigma = state.sigma;
    let table = DerivativeTable::new(sys);
    let jacobian = table.eval_full(&state.residues)?;
    let minor = jacobian.select_columns(&state.minor_columns)?;
    let sigma_modulus = BigInt::from(p).pow(sigma);
    let det = minor.determinant()?.mod_floor(&sigma_modulus);
    match arith::valuation(&det, p) {
        Some(v) if v == sigma - 1 => {}
        _ => {
            return Err(Error::Precondition(format!(
                "minor certificate invalid: determinant valuation is not {}",
                sigma - 1
            )));
        }
    }

    let free_columns: Vec<usize> = (0..ms)
        .filter(|c| !state.minor_columns.contains(c))
        .collect();
    let free_count = free_columns.len();
    let states = BigUint::from(p).pow(free_count as u32 + sigma - 1);
    budget.admit_states("lift step extension enumeration", &states)?;

    let phi: Vec<BigInt> = values.iter().map(|v| v / &modulus).collect();
    let p_sigma_minus_1 = BigInt::from(p).pow(sigma - 1);
    let step_scale = BigInt::from(p).pow(sigma + state.nu);
    let next_modulus = BigInt::from(p).pow(level + 1);

    let mut extensions = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut free_digits = vec![0u64; free_count];
    loop {
        // L0 * y1 = -p^(sigma-1) * (phi + L1 * y2)  (mod p^sigma)
        let rhs: Vec<BigInt> = (0..rr)
            .map(|row| {
                let mut acc = phi[row].clone();
                for (slot, &col) in free_columns.iter().enumerate() {
                    acc += jacobian.get(row, col) * BigInt::from(free_digits[slot]);
                }
                -(&p_sigma_minus_1 * acc)
            })
            .collect();
        let solutions = solve_mod_prime_power(&minor, &rhs, p, sigma, budget.max_states)?
            .ok_or_else(|| {
                Error::InternalInconsistency(
                    "linearized lift congruence insoluble despite a valid certificate".into(),
                )
            })?;
        for y1 in solutions {
            let mut offset = vec![BigInt::zero(); ms];
            for (slot, &col) in state.minor_columns.iter().enumerate() {
                offset[col] = y1[slot].clone();
            }
            for (slot, &col) in free_columns.iter().enumerate() {
                offset[col] = &p_sigma_minus_1 * BigInt::from(free_digits[slot]);
            }
            let residues: Vec<BigInt> = state
                .residues
                .iter()
                .zip(&offset)
                .map(|(a, x)| (a + &step_scale * x).mod_floor(&next_modulus))
                .collect();
            let check = sys.evaluate(&residues)?;
            if check.iter().any(|v| !v.mod_floor(&next_modulus).is_zero()) {
                return Err(Error::InternalInconsistency(format!(
                    "lift extension fails re-verification modulo {p}^{}",
                    level + 1
                )));
            }
            if !seen.insert(residues.clone()) {
                return Err(Error::InternalInconsistency(
                    "duplicate lift extension generated".into(),
                ));
            }
            extensions.push(LiftState {
                p,
                sigma,
                nu: state.nu + 1,
                residues,
                minor_columns: state.minor_columns.clone(),
            });
        }
        if free_count == 0 || !enumerate::increment_le(&mut free_digits, p) {
            break;
        }
    }
    Ok(extensions)
}

fn validate_certificate_shape(state: &LiftState, ms: usize, rr: usize) -> Result<()> {
    if state.residues.len() != ms {
        return Err(Error::ShapeMismatch(format!(
            "state has {} residues, the system has {ms} variables",
            state.residues.len()
        )));
    }
    if state.minor_columns.len() != rr {
        return Err(Error::ShapeMismatch(format!(
            "certificate names {} minor columns, the system has {rr} rows",
            state.minor_columns.len()
        )));
    }
    if state.minor_columns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ShapeMismatch(
            "minor columns must be strictly ascending".into(),
        ));
    }
    if state.minor_columns.last().is_some_and(|&c| c >= ms) {
        return Err(Error::ShapeMismatch(
            "minor column index out of range".into(),
        ));
    }
    if state.sigma < 1 {
        return Err(Error::Precondition("sigma must be at least 1".into()));
    }
    Ok(())
}

/// Lifts a seed to a solution modulo `p^precision`, taking the first
/// extension in canonical order at every step. Deterministic; the result is
/// re-verified and reduces to the seed modulo `p^sigma`.
pub fn lift_to_precision(
    sys: &MultilinearSystem,
    seed: &SeedPoint,
    precision: u32,
    budget: &Budget,
) -> Result<PAdicPoint> {
    if precision < seed.level() {
        return Err(Error::Precondition(format!(
            "target precision {precision} is below the seed level {}",
            seed.level()
        )));
    }
    let mut state = LiftState::from_seed(seed);
    while state.level() < precision {
        let extensions = lift_step(sys, &state, budget)?;
        state = extensions.into_iter().next().ok_or_else(|| {
            Error::InternalInconsistency("lift step produced no extensions".into())
        })?;
    }
    let target_modulus = BigInt::from(seed.p).pow(precision);
    let residues: Vec<BigInt> = state
        .residues
        .iter()
        .map(|r| r.mod_floor(&target_modulus))
        .collect();

    // Self-validation: the congruences at the target precision, and
    // compatibility with the seed.
    let values = sys.evaluate(&residues)?;
    if values
        .iter()
        .any(|v| !v.mod_floor(&target_modulus).is_zero())
    {
        return Err(Error::InternalInconsistency(
            "lifted point fails re-verification at the target precision".into(),
        ));
    }
    let seed_modulus = BigInt::from(seed.p).pow(seed.sigma);
    let compatible = residues
        .iter()
        .zip(&seed.residues)
        .all(|(r, s)| r.mod_floor(&seed_modulus) == s.mod_floor(&seed_modulus));
    if !compatible {
        return Err(Error::InternalInconsistency(
            "lifted point does not reduce to its seed".into(),
        ));
    }
    Ok(PAdicPoint {
        p: seed.p,
        precision,
        residues,
        seed: seed.clone(),
    })
}

/// `G(y) = F(basis * y)`: the system restricted to the integral subspace
/// spanned by the columns of `basis`, expanded and canonicalized.
///
/// The degree is preserved; individual forms may collapse to zero.
pub fn restrict_to_subspace(
    fs: &FormSystem,
    basis: &IntMatrix,
    budget: &Budget,
) -> Result<FormSystem> {
    let s = fs.variables();
    let s_prime = basis.cols();
    if basis.rows() != s {
        return Err(Error::ShapeMismatch(format!(
            "basis has {} rows, the system has {s} variables",
            basis.rows()
        )));
    }
    if s_prime < 1 || s_prime > s {
        return Err(Error::ShapeMismatch(format!(
            "subspace dimension {s_prime} out of range 1..={s}"
        )));
    }
    // x_n -> sum_k basis[n][k] y_k
    let subs: Vec<SparsePoly> = (0..s)
        .map(|n| {
            SparsePoly::from_terms(
                s_prime,
                (0..s_prime).map(|k| {
                    let mut exps = vec![0u32; s_prime];
                    exps[k] = 1;
                    (exps, basis.get(n, k).clone())
                }),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let forms = fs
        .forms()
        .iter()
        .map(|f| {
            let image = crate::poly::substitute(f.terms(), &subs, budget, "subspace restriction")?;
            Ok(image
                .terms()
                .iter()
                .map(|(e, c)| Monomial {
                    exponents: e.clone(),
                    coefficient: c.clone(),
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    FormSystem::new(fs.degree(), s_prime, forms)
}

fn pow_u64(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp)
        .expect("modulus fits u64 whenever the state count passed the budget")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{expand_multilinear, form_from_terms, parse_form_system};

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn bs(ns: &[i64]) -> Vec<BigInt> {
        ns.iter().map(|&n| b(n)).collect()
    }

    fn cube_minus_two_cubes() -> MultilinearSystem {
        // x^3 - 2y^3
        let fs = form_from_terms(3, 2, &[(1, &[3, 0]), (-2, &[0, 3])]).unwrap();
        expand_multilinear(&fs, 1, &Budget::default()).unwrap()
    }

    fn three_cubes(m: u32) -> MultilinearSystem {
        let fs =
            form_from_terms(3, 3, &[(1, &[3, 0, 0]), (1, &[0, 3, 0]), (1, &[0, 0, 3])]).unwrap();
        expand_multilinear(&fs, m, &Budget::default()).unwrap()
    }

    fn matrix(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| b(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn matrix_order_examples() {
        assert_eq!(
            matrix_order(&IntMatrix::identity(3), 7).unwrap(),
            MatrixOrder::Finite(1)
        );
        assert_eq!(
            matrix_order(&matrix(&[&[3, -6]]), 5).unwrap(),
            MatrixOrder::Finite(1)
        );
        assert_eq!(
            matrix_order(&matrix(&[&[5, 0], &[0, 5]]), 5).unwrap(),
            MatrixOrder::Finite(3)
        );
        assert_eq!(
            matrix_order(&matrix(&[&[0, 0], &[0, 0]]), 5).unwrap(),
            MatrixOrder::Infinite
        );
        assert!(matches!(
            matrix_order(&matrix(&[&[1], &[2]]), 5),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn singularity_examples() {
        let sys = cube_minus_two_cubes();
        // zero point: zero matrix, singular
        let report = singular_rank_check(&sys, &bs(&[0, 0]), 5).unwrap();
        assert_eq!(report.verdict, Singularity::Singular);
        assert_eq!(report.rank, 0);

        // (3, 1): gradient (27, -6) = (2, 4) mod 5, rank 1, nonsingular
        let report = singular_rank_check(&sys, &bs(&[3, 1]), 5).unwrap();
        assert_eq!(report.verdict, Singularity::Nonsingular);
        assert_eq!(report.rank, 1);

        // Fermat cubic with two equal blocks: dependent blocks are singular
        let fs = form_from_terms(
            3,
            4,
            &[
                (1, &[3, 0, 0, 0]),
                (1, &[0, 3, 0, 0]),
                (1, &[0, 0, 3, 0]),
                (1, &[0, 0, 0, 3]),
            ],
        )
        .unwrap();
        let sys = expand_multilinear(&fs, 2, &Budget::default()).unwrap();
        let point = bs(&[1, -1, 0, 0, 1, -1, 0, 0]);
        let report = singular_rank_check(&sys, &point, 5).unwrap();
        assert_eq!(report.verdict, Singularity::Singular);
    }

    #[test]
    fn structurally_singular_when_too_few_variables() {
        // x^3 in one variable, m = 1: ms = 1 = Rr, fine; but m*s < R*r
        // happens for R = 2 forms in one variable.
        let fs = FormSystem::new(
            3,
            1,
            vec![
                vec![Monomial {
                    exponents: vec![3],
                    coefficient: b(1),
                }],
                vec![Monomial {
                    exponents: vec![3],
                    coefficient: b(2),
                }],
            ],
        )
        .unwrap();
        let sys = expand_multilinear(&fs, 1, &Budget::default()).unwrap();
        let report = singular_rank_check(&sys, &bs(&[1]), 5).unwrap();
        assert_eq!(report.verdict, Singularity::Singular);
        assert!(report.note.as_deref().unwrap().contains("structurally"));
    }

    #[test]
    fn seed_search_cube_minus_two_cubes() {
        let sys = cube_minus_two_cubes();
        let seeds = find_seeds(&sys, 5, 1, &Budget::default(), 1).unwrap();
        let residues: Vec<Vec<BigInt>> = seeds.iter().map(|s| s.residues.clone()).collect();
        assert_eq!(
            residues,
            vec![bs(&[3, 1]), bs(&[1, 2]), bs(&[4, 3]), bs(&[2, 4])]
        );
        for seed in &seeds {
            assert_eq!(seed.sigma, 1);
            assert_eq!(seed.minor_columns, vec![0]);
        }
    }

    #[test]
    fn seed_search_three_cubes_mod_2() {
        let sys = three_cubes(1);
        let seeds = find_seeds(&sys, 2, 1, &Budget::default(), 1).unwrap();
        let residues: Vec<Vec<BigInt>> = seeds.iter().map(|s| s.residues.clone()).collect();
        assert_eq!(
            residues,
            vec![bs(&[1, 1, 0]), bs(&[1, 0, 1]), bs(&[0, 1, 1])]
        );
        assert_eq!(seeds[0].minor_columns, vec![0]);
        assert_eq!(seeds[2].minor_columns, vec![1]);
    }

    #[test]
    fn seed_search_finds_nothing_for_triple_root() {
        // F = x^3: mod 3 the gradient vanishes identically on zeros; mod 27
        // condition (3.2) forces 3 | a which kills (3.3).
        let fs = form_from_terms(3, 1, &[(1, &[3])]).unwrap();
        let sys = expand_multilinear(&fs, 1, &Budget::default()).unwrap();
        let seeds = find_seeds(&sys, 3, 2, &Budget::default(), 1).unwrap();
        assert!(seeds.is_empty());
    }

    #[test]
    fn seed_search_is_worker_independent() {
        let sys = cube_minus_two_cubes();
        let one = find_seeds(&sys, 5, 1, &Budget::default(), 1).unwrap();
        let two = find_seeds(&sys, 5, 1, &Budget::default(), 2).unwrap();
        let eight = find_seeds(&sys, 5, 1, &Budget::default(), 8).unwrap();
        assert_eq!(one, two);
        assert_eq!(one, eight);
    }

    #[test]
    fn seed_search_needs_enough_variables() {
        // two forms in one variable: ms = 1 < Rr = 2
        let fs = FormSystem::new(
            3,
            1,
            vec![
                vec![Monomial {
                    exponents: vec![3],
                    coefficient: b(1),
                }],
                vec![Monomial {
                    exponents: vec![3],
                    coefficient: b(2),
                }],
            ],
        )
        .unwrap();
        let sys = expand_multilinear(&fs, 1, &Budget::default()).unwrap();
        assert!(matches!(
            find_seeds(&sys, 5, 1, &Budget::default(), 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn seed_search_budget() {
        let sys = three_cubes(1);
        let tiny = Budget::with_max_states(4);
        assert!(matches!(
            find_seeds(&sys, 2, 1, &tiny, 1),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn lift_step_examples() {
        let sys = cube_minus_two_cubes();
        let seed = SeedPoint {
            p: 5,
            sigma: 1,
            residues: bs(&[3, 1]),
            minor_columns: vec![0],
        };
        let state = LiftState::from_seed(&seed);
        let exts = lift_step(&sys, &state, &Budget::default()).unwrap();
        assert_eq!(exts.len(), 5);
        // first extension in canonical order keeps the free coordinate at 0
        assert_eq!(exts[0].residues, bs(&[3, 1]));
        // all extensions solve the congruence mod 25 (re-verified inside, but
        // check against brute force too)
        let mut brute = Vec::new();
        for y in 0..25u32 {
            for x in 0..25u32 {
                let v = i64::from(x).pow(3) - 2 * i64::from(y).pow(3);
                if v.rem_euclid(25) == 0
                    && i64::from(x).rem_euclid(5) == 3
                    && i64::from(y).rem_euclid(5) == 1
                {
                    brute.push(bs(&[i64::from(x), i64::from(y)]));
                }
            }
        }
        let mut got: Vec<Vec<BigInt>> = exts.iter().map(|e| e.residues.clone()).collect();
        got.sort();
        brute.sort();
        assert_eq!(got, brute);

        // second step reaches (53, 1) first: 53^3 = 2 mod 125
        let next = lift_step(&sys, &exts[0], &Budget::default()).unwrap();
        assert_eq!(next[0].residues, bs(&[53, 1]));
        assert!(next.iter().any(|e| e.residues == bs(&[53, 1])));
    }

    #[test]
    fn lift_keeps_exact_zeros() {
        let sys = three_cubes(1);
        let seed = SeedPoint {
            p: 5,
            sigma: 1,
            residues: bs(&[1, 4, 0]), // 1 + 64 + 0 = 65 = 0 mod 5
            minor_columns: vec![0],
        };
        let state = LiftState::from_seed(&seed);
        let exts = lift_step(&sys, &state, &Budget::default()).unwrap();
        // (1, -1, 0) solves exactly over Z; its mod-25 representative
        // (1, 24, 0) must appear among the extensions
        assert!(exts.iter().any(|e| e.residues == bs(&[1, 24, 0])));
        assert_eq!(exts.len(), 25); // p^(ms - Rr) = 5^2
    }

    #[test]
    fn lift_to_precision_examples() {
        let sys = cube_minus_two_cubes();
        let seed = SeedPoint {
            p: 5,
            sigma: 1,
            residues: bs(&[3, 1]),
            minor_columns: vec![0],
        };
        let point = lift_to_precision(&sys, &seed, 3, &Budget::default()).unwrap();
        assert_eq!(point.residues, bs(&[53, 1]));

        // N = 2*sigma - 1: the seed itself, repackaged
        let point = lift_to_precision(&sys, &seed, 1, &Budget::default()).unwrap();
        assert_eq!(point.residues, seed.residues);
        assert_eq!(point.precision, 1);

        // below the seed level: precondition
        assert!(matches!(
            lift_to_precision(&sys, &seed, 0, &Budget::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lift_to_high_precision_self_validates() {
        let sys = three_cubes(1);
        let seed = SeedPoint {
            p: 2,
            sigma: 1,
            residues: bs(&[1, 1, 0]),
            minor_columns: vec![0],
        };
        let point = lift_to_precision(&sys, &seed, 10, &Budget::default()).unwrap();
        let modulus = BigInt::from(1024);
        let values = sys.evaluate(&point.residues).unwrap();
        assert!(values.iter().all(|v| v.mod_floor(&modulus).is_zero()));
        // reduces to the seed mod p
        let two = BigInt::from(2);
        assert_eq!(
            point
                .residues
                .iter()
                .map(|r| r.mod_floor(&two))
                .collect::<Vec<_>>(),
            seed.residues
        );
    }

    #[test]
    fn lift_rejects_bad_input() {
        let sys = cube_minus_two_cubes();
        // not a solution mod 5
        let state = LiftState {
            p: 5,
            sigma: 1,
            nu: 0,
            residues: bs(&[1, 1]),
            minor_columns: vec![0],
        };
        assert!(matches!(
            lift_step(&sys, &state, &Budget::default()),
            Err(Error::Precondition(_))
        ));
        // a solution whose certified minor is not a unit: (0, 0)
        let state = LiftState {
            p: 5,
            sigma: 1,
            nu: 0,
            residues: bs(&[0, 0]),
            minor_columns: vec![0],
        };
        assert!(matches!(
            lift_step(&sys, &state, &Budget::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lift_count_lower_bound() {
        // every step returns at least p^(ms - Rr) extensions
        let sys = three_cubes(1);
        let seed = SeedPoint {
            p: 2,
            sigma: 1,
            residues: bs(&[1, 1, 0]),
            minor_columns: vec![0],
        };
        let mut state = LiftState::from_seed(&seed);
        for _ in 0..4 {
            let exts = lift_step(&sys, &state, &Budget::default()).unwrap();
            assert!(exts.len() >= 4, "expected at least 2^2 extensions");
            state = exts.into_iter().next().unwrap();
        }
    }

    #[test]
    fn sigma_two_seed_search_and_lift() {
        // x^2 - 25 y^2: modulo 5 the Jacobian (2x, -50y) vanishes on every
        // solution, so sigma = 1 yields nothing; at sigma = 2 the solution
        // (5, 1) modulo 125 has det = 2*5 of valuation exactly 1.
        let fs = form_from_terms(2, 2, &[(1, &[2, 0]), (-25, &[0, 2])]).unwrap();
        let sys = expand_multilinear(&fs, 1, &Budget::default()).unwrap();
        let seeds = find_seeds(&sys, 5, 2, &Budget::default(), 1).unwrap();
        assert!(!seeds.is_empty());
        assert!(seeds.iter().all(|s| s.sigma == 2));
        let first = &seeds[0];
        assert_eq!(first.residues, bs(&[5, 1]));
        assert_eq!(first.minor_columns, vec![0]);

        // one step: the linearized minor congruence has a non-unit pivot,
        // giving p solutions per free offset
        let exts = lift_step(&sys, &LiftState::from_seed(first), &Budget::default()).unwrap();
        assert_eq!(exts.len(), 25);
        let modulus = BigInt::from(5).pow(4);
        for ext in &exts {
            let values = sys.evaluate(&ext.residues).unwrap();
            assert!(values.iter().all(|v| v.mod_floor(&modulus).is_zero()));
        }

        // and the full lift self-validates at higher precision
        let point = lift_to_precision(&sys, first, 6, &Budget::default()).unwrap();
        let modulus = BigInt::from(5).pow(6);
        let values = sys.evaluate(&point.residues).unwrap();
        assert!(values.iter().all(|v| v.mod_floor(&modulus).is_zero()));
    }

    #[test]
    fn linear_space_seed_and_lift_on_fermat_cubic() {
        // m = 2 on the four-variable Fermat cubic: the line through
        // (1,1,0,0) and (0,0,1,1) is a nonsingular mod-2 linear-space
        // solution, so the search finds seeds and the lift extends a whole
        // plane's worth of residues at once.
        let fs = form_from_terms(
            3,
            4,
            &[
                (1, &[3, 0, 0, 0]),
                (1, &[0, 3, 0, 0]),
                (1, &[0, 0, 3, 0]),
                (1, &[0, 0, 0, 3]),
            ],
        )
        .unwrap();
        let sys = expand_multilinear(&fs, 2, &Budget::default()).unwrap();
        assert_eq!(sys.row_count(), 4);
        assert_eq!(sys.variable_count(), 8);

        let seeds = find_seeds(&sys, 2, 1, &Budget::default(), 2).unwrap();
        let line = bs(&[1, 1, 0, 0, 0, 0, 1, 1]);
        let line_seed = seeds
            .iter()
            .find(|s| s.residues == line)
            .expect("the antidiagonal line is a seed");
        assert_eq!(line_seed.minor_columns, vec![0, 2, 4, 6]);

        let point = lift_to_precision(&sys, line_seed, 6, &Budget::default()).unwrap();
        let modulus = BigInt::from(2).pow(6);
        let values = sys.evaluate(&point.residues).unwrap();
        assert!(values.iter().all(|v| v.mod_floor(&modulus).is_zero()));
        // still nonsingular where we landed
        let report = singular_rank_check(&sys, &point.residues, 2).unwrap();
        assert_eq!(report.verdict, Singularity::Nonsingular);
    }

    #[test]
    fn seed_document_round_trip() {
        let seed = SeedPoint {
            p: 5,
            sigma: 2,
            residues: bs(&[53, 1]),
            minor_columns: vec![0],
        };
        let doc = seed.to_document();
        assert_eq!(doc.precision, 3);
        let json = serde_json::to_string(&doc).unwrap();
        let parsed = PointDoc::parse(&json).unwrap().into_seed().unwrap();
        assert_eq!(parsed, seed);

        // a lifted-point document is not a seed document
        let bad = PointDoc {
            p: 5,
            sigma: 1,
            precision: 3,
            residues: vec!["53".into(), "1".into()],
            minor_columns: vec![0],
        };
        assert!(bad.into_seed().is_err());
    }

    #[test]
    fn restriction_examples() {
        let fs = parse_form_system(
            r#"{"degree":3,"variables":3,"forms":[[
                {"exponents":[3,0,0],"coefficient":"1"},
                {"exponents":[0,3,0],"coefficient":"1"},
                {"exponents":[0,0,3],"coefficient":"1"}]]}"#,
        )
        .unwrap();
        let budget = Budget::default();

        // identity basis: unchanged
        let id = IntMatrix::identity(3);
        assert_eq!(restrict_to_subspace(&fs, &id, &budget).unwrap(), fs);

        // drop the third variable: x1^3 + x2^3
        let first_two = id.select_columns(&[0, 1]).unwrap();
        let g = restrict_to_subspace(&fs, &first_two, &budget).unwrap();
        assert_eq!(g.variables(), 2);
        assert_eq!(g.monomials(0).len(), 2);

        // span {(1,-1,0), (0,0,1)}: the y1 terms cancel, leaving y2^3
        let basis = matrix(&[&[1, 0], &[-1, 0], &[0, 1]]);
        let g = restrict_to_subspace(&fs, &basis, &budget).unwrap();
        let monos = g.monomials(0);
        assert_eq!(monos.len(), 1);
        assert_eq!(monos[0].exponents, vec![0, 3]);
        assert_eq!(monos[0].coefficient, b(1));

        // shape mismatch
        let bad = IntMatrix::identity(2);
        assert!(matches!(
            restrict_to_subspace(&fs, &bad, &budget),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn box_order_search() {
        let sys = cube_minus_two_cubes();
        // (1, 0) has gradient (3, 0): a unit minor at p = 5
        assert_eq!(
            matrix_order_box_minimum(&sys, 5, 1, &Budget::default()).unwrap(),
            MatrixOrder::Finite(1)
        );
        // at p = 3 every gradient entry 3x^2, -6y^2 is divisible by 3
        assert_eq!(
            matrix_order_box_minimum(&sys, 3, 1, &Budget::default()).unwrap(),
            MatrixOrder::Finite(2)
        );
    }
}
