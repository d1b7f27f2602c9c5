//! Multilinear expansion of a form system.
//!
//! Substituting `x -> t_1 x_1 + ... + t_m x_m` into a degree-`d` form `F` and
//! collecting the coefficient of each monomial `t_{j_1}... t_{j_d}` yields one
//! integer polynomial per nondecreasing multi-index `j`, in the `m*s` block
//! variables `x_{i,n}`. A common zero of all of those polynomials is exactly
//! an m-dimensional linear space of solutions of `F = 0`, which is what the
//! lifting and counting machinery consumes.
//!
//! The symmetric multilinear form itself has rational coefficients (denominator
//! dividing `d!`) and is never materialized; collecting integer coefficients of
//! the expanded substitution sidesteps it.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::forms::FormSystem;
use crate::linalg::IntMatrix;
use crate::poly::{substitute, SparsePoly};

/// A nondecreasing `d`-tuple from `{1, .., m}` together with its multinomial
/// factor `A(j) = d! / prod(multiplicities!)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndex {
    entries: Vec<u32>,
    factor: BigUint,
}

impl MultiIndex {
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn factor(&self) -> &BigUint {
        &self.factor
    }

    pub fn degree(&self) -> u32 {
        self.entries.len() as u32
    }

    /// Number of times block `i` (1-based) occurs in the tuple.
    pub fn multiplicity(&self, block: u32) -> u32 {
        self.entries.iter().filter(|&&e| e == block).count() as u32
    }

    /// Multiplicity vector over blocks `1..=m`.
    pub fn multiplicities(&self, m: u32) -> Vec<u32> {
        (1..=m).map(|i| self.multiplicity(i)).collect()
    }
}

/// The ordered set `J` of nondecreasing `d`-tuples over `{1, .., m}`, in
/// lexicographic order. Its cardinality is `binomial(d - 1 + m, d)`.
pub fn multi_index_set(m: u32, d: u32) -> Vec<MultiIndex> {
    assert!(m >= 1 && d >= 1, "multi_index_set requires m, d >= 1");
    let mut out = Vec::new();
    let mut current = vec![1u32; d as usize];
    loop {
        let mults: Vec<u32> = (1..=m)
            .map(|i| current.iter().filter(|&&e| e == i).count() as u32)
            .collect();
        out.push(MultiIndex {
            entries: current.clone(),
            factor: arith::multinomial(&mults),
        });
        // next nondecreasing tuple in lex order
        let Some(pos) = current.iter().rposition(|&e| e < m) else {
            break;
        };
        let bumped = current[pos] + 1;
        for entry in current.iter_mut().skip(pos) {
            *entry = bumped;
        }
    }
    out
}

/// The expanded system: one integer polynomial per `(rho, j)` pair, in the
/// `m*s` variables `x_{i,n}` (column `i*s + n`, both zero-based).
///
/// Rows are ordered form-major (`rho` outer, `j` inner in the lexicographic
/// order of [`multi_index_set`]); this fixed order makes every downstream
/// output byte-stable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearSystem {
    source: FormSystem,
    m: u32,
    index_set: Vec<MultiIndex>,
    components: Vec<SparsePoly>,
}

impl MultilinearSystem {
    pub fn source(&self) -> &FormSystem {
        &self.source
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn block_size(&self) -> usize {
        self.source.variables()
    }

    pub fn degree(&self) -> u32 {
        self.source.degree()
    }

    pub fn form_count(&self) -> usize {
        self.source.form_count()
    }

    pub fn index_set(&self) -> &[MultiIndex] {
        &self.index_set
    }

    /// `r = Card(J)`.
    pub fn index_count(&self) -> usize {
        self.index_set.len()
    }

    /// Number of rows `R * r`.
    pub fn row_count(&self) -> usize {
        self.form_count() * self.index_count()
    }

    /// Number of variables `m * s`.
    pub fn variable_count(&self) -> usize {
        self.m as usize * self.block_size()
    }

    /// The polynomial attached to `(rho, j)`, both zero-based.
    pub fn component(&self, rho: usize, j: usize) -> &SparsePoly {
        &self.components[rho * self.index_count() + j]
    }

    pub fn components(&self) -> &[SparsePoly] {
        &self.components
    }

    pub fn row_index(&self, rho: usize, j: usize) -> usize {
        rho * self.index_count() + j
    }

    /// `(rho, j)` indices for a row, both zero-based.
    pub fn row_label(&self, row: usize) -> (usize, &MultiIndex) {
        let r = self.index_count();
        (row / r, &self.index_set[row % r])
    }

    pub fn column_index(&self, block: usize, coordinate: usize) -> usize {
        block * self.block_size() + coordinate
    }

    /// Evaluates every component at an integer point of length `m*s`, in
    /// canonical row order.
    pub fn evaluate(&self, point: &[BigInt]) -> Result<Vec<BigInt>> {
        if point.len() != self.variable_count() {
            return Err(Error::ShapeMismatch(format!(
                "point of length {}, expected {}",
                point.len(),
                self.variable_count()
            )));
        }
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    /// The `Rr x ms` Jacobian at `point`, by symbolic differentiation of each
    /// component.
    pub fn jacobian_at(&self, point: &[BigInt]) -> Result<JacobianEvaluation> {
        let matrix = DerivativeTable::new(self).eval_full(point)?;
        Ok(JacobianEvaluation {
            matrix,
            point: point.to_vec(),
        })
    }

    /// The same matrix assembled from first principles: contractions of the
    /// symmetric multilinear form with unit vectors, summed over the slots of
    /// each multi-index. Kept deliberately independent of the expanded
    /// component polynomials so the two construction routes can be checked
    /// against each other.
    pub fn jacobian_via_contraction(&self, point: &[BigInt]) -> Result<JacobianEvaluation> {
        if point.len() != self.variable_count() {
            return Err(Error::ShapeMismatch(format!(
                "point of length {}, expected {}",
                point.len(),
                self.variable_count()
            )));
        }
        let s = self.block_size();
        let m = self.m as usize;
        let d = self.degree() as usize;
        let d_factorial = BigRational::from_integer(BigInt::from(arith::factorial(self.degree())));
        let blocks: Vec<&[BigInt]> = (0..m).map(|i| &point[i * s..(i + 1) * s]).collect();

        let mut matrix = IntMatrix::zero(self.row_count(), self.variable_count());
        for rho in 0..self.form_count() {
            let form = self.source.form(rho);
            for (jidx, mindex) in self.index_set.iter().enumerate() {
                let row = self.row_index(rho, jidx);
                let factor = BigRational::from_integer(BigInt::from(mindex.factor().clone()));
                let mut entries = vec![BigRational::zero(); self.variable_count()];
                for k in 0..d {
                    let block = mindex.entries()[k] as usize - 1;
                    // Arguments with slot k removed.
                    let args: Vec<&[BigInt]> = mindex
                        .entries()
                        .iter()
                        .enumerate()
                        .filter(|&(pos, _)| pos != k)
                        .map(|(_, &e)| blocks[e as usize - 1])
                        .collect();
                    let contractions = contract_with_units(form, &args, s)?;
                    for (n, value) in contractions.into_iter().enumerate() {
                        entries[block * s + n] += value;
                    }
                }
                for (col, value) in entries.into_iter().enumerate() {
                    let exact = &factor * value / &d_factorial;
                    if !exact.is_integer() {
                        return Err(Error::InternalInconsistency(format!(
                            "non-integral Jacobian entry at row {row}, column {col}"
                        )));
                    }
                    matrix.set(row, col, exact.to_integer());
                }
            }
        }
        Ok(JacobianEvaluation {
            matrix,
            point: point.to_vec(),
        })
    }
}

/// For fixed arguments `args = (w_1, .., w_{d-1})`, the vector over `n` of
/// `d! * Phi(e_n, w_1, .., w_{d-1})`, where `Phi` is the symmetric multilinear
/// form of `form`. Uses the polarization identity
/// `d! * Phi(y_1, .., y_d) = sum_{S subset [d], S nonempty} (-1)^(d-|S|) F(sum_S y_k)`,
/// splitting on whether the unit-vector slot belongs to `S`.
fn contract_with_units(
    form: &SparsePoly,
    args: &[&[BigInt]],
    s: usize,
) -> Result<Vec<BigRational>> {
    let d_minus_1 = args.len();
    let mut out = vec![BigRational::zero(); s];
    // subsets T of the d-1 fixed arguments
    for mask in 0..(1u32 << d_minus_1) {
        let mut w = vec![BigInt::zero(); s];
        for (k, arg) in args.iter().enumerate() {
            if mask & (1 << k) != 0 {
                for (acc, x) in w.iter_mut().zip(arg.iter()) {
                    *acc += x;
                }
            }
        }
        let popcount = mask.count_ones() as usize;
        let sign = if (d_minus_1 - popcount).is_multiple_of(2) {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        let base = form.eval(&w)?;
        for n in 0..s {
            w[n] += BigInt::one();
            let shifted = form.eval(&w)?;
            w[n] -= BigInt::one();
            out[n] += BigRational::from_integer(&sign * (shifted - &base));
        }
    }
    Ok(out)
}

/// Precomputed partial derivatives of every component, row-major. Repeated
/// Jacobian evaluations (seed search, class counting) go through this table
/// instead of re-differentiating per point.
pub(crate) struct DerivativeTable {
    rows: usize,
    cols: usize,
    polys: Vec<SparsePoly>,
}

impl DerivativeTable {
    pub(crate) fn new(sys: &MultilinearSystem) -> Self {
        let rows = sys.row_count();
        let cols = sys.variable_count();
        let mut polys = Vec::with_capacity(rows * cols);
        for component in &sys.components {
            for col in 0..cols {
                polys.push(component.partial_derivative(col));
            }
        }
        DerivativeTable { rows, cols, polys }
    }

    pub(crate) fn eval_full(&self, point: &[BigInt]) -> Result<IntMatrix> {
        if point.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "point of length {}, expected {}",
                point.len(),
                self.cols
            )));
        }
        let mut matrix = IntMatrix::zero(self.rows, self.cols);
        for row in 0..self.rows {
            for col in 0..self.cols {
                matrix.set(row, col, self.polys[row * self.cols + col].eval(point)?);
            }
        }
        Ok(matrix)
    }

    /// Only the selected columns, as an `Rr x |columns|` matrix.
    pub(crate) fn eval_columns(&self, point: &[BigInt], columns: &[usize]) -> Result<IntMatrix> {
        if point.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "point of length {}, expected {}",
                point.len(),
                self.cols
            )));
        }
        let mut matrix = IntMatrix::zero(self.rows, columns.len());
        for row in 0..self.rows {
            for (slot, &col) in columns.iter().enumerate() {
                matrix.set(row, slot, self.polys[row * self.cols + col].eval(point)?);
            }
        }
        Ok(matrix)
    }
}

/// The exact `Rr x ms` integer Jacobian of the expanded system at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobianEvaluation {
    matrix: IntMatrix,
    point: Vec<BigInt>,
}

impl JacobianEvaluation {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn point(&self) -> &[BigInt] {
        &self.point
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        self.matrix.get(row, col)
    }
}

/// Expands `F(t_1 x_1 + ... + t_m x_m)` for every form of the system and
/// collects the coefficient polynomial of each `t`-monomial.
///
/// The returned components satisfy, identically in `t` and the block
/// variables,
///
/// ```text
/// F_rho(sum_i t_i x_i) = sum_{j in J} t_{j_1} .. t_{j_d} * Phi_{rho,j}(xbar).
/// ```
pub fn expand_multilinear(fs: &FormSystem, m: u32, budget: &Budget) -> Result<MultilinearSystem> {
    if m < 1 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    let s = fs.variables();
    let mu = m as usize;
    let combined = mu + mu * s; // t variables first, then block variables
    let index_set = multi_index_set(m, fs.degree());
    let slot_of: BTreeMap<Vec<u32>, usize> = index_set
        .iter()
        .enumerate()
        .map(|(k, j)| (j.entries().to_vec(), k))
        .collect();

    // x_n -> sum_i t_i * x_{i,n}
    let subs: Vec<SparsePoly> = (0..s)
        .map(|n| {
            SparsePoly::from_terms(
                combined,
                (0..mu).map(|i| {
                    let mut exps = vec![0u32; combined];
                    exps[i] = 1;
                    exps[mu + i * s + n] = 1;
                    (exps, BigInt::one())
                }),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let r = index_set.len();
    let mut components = vec![SparsePoly::zero(mu * s); fs.form_count() * r];
    for rho in 0..fs.form_count() {
        let expanded = substitute(fs.form(rho).terms(), &subs, budget, "multilinear expansion")?;
        let mut buckets: Vec<Vec<(Vec<u32>, BigInt)>> = vec![Vec::new(); r];
        for (exps, coeff) in expanded.terms() {
            let t_part = &exps[..mu];
            let mut tuple = Vec::with_capacity(fs.degree() as usize);
            for (i, &e) in t_part.iter().enumerate() {
                for _ in 0..e {
                    tuple.push(i as u32 + 1);
                }
            }
            let slot = *slot_of.get(&tuple).ok_or_else(|| {
                Error::InternalInconsistency(format!(
                    "expansion produced the unexpected t-monomial {tuple:?}"
                ))
            })?;
            buckets[slot].push((exps[mu..].to_vec(), coeff.clone()));
        }
        for (jidx, bucket) in buckets.into_iter().enumerate() {
            budget.admit_terms("multilinear expansion", bucket.len())?;
            components[rho * r + jidx] = SparsePoly::from_terms(mu * s, bucket)?;
        }
    }
    Ok(MultilinearSystem {
        source: fs.clone(),
        m,
        index_set,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{form_from_terms, parse_form_system};

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn bs(ns: &[i64]) -> Vec<BigInt> {
        ns.iter().map(|&n| b(n)).collect()
    }

    fn three_cubes() -> FormSystem {
        form_from_terms(3, 3, &[(1, &[3, 0, 0]), (1, &[0, 3, 0]), (1, &[0, 0, 3])]).unwrap()
    }

    fn fermat_quartic_surface() -> FormSystem {
        // x1^3 + x2^3 + x3^3 + x4^3
        form_from_terms(
            3,
            4,
            &[
                (1, &[3, 0, 0, 0]),
                (1, &[0, 3, 0, 0]),
                (1, &[0, 0, 3, 0]),
                (1, &[0, 0, 0, 3]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn multi_index_examples() {
        // m=1, d=3: a single index with A = 1
        let j = multi_index_set(1, 3);
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].entries(), &[1, 1, 1]);
        assert_eq!(j[0].factor(), &BigUint::from(1u32));

        // m=2, d=3: binomial coefficients of (t1 + t2)^3
        let j = multi_index_set(2, 3);
        let entries: Vec<&[u32]> = j.iter().map(|x| x.entries()).collect();
        assert_eq!(
            entries,
            vec![&[1, 1, 1][..], &[1, 1, 2], &[1, 2, 2], &[2, 2, 2]]
        );
        let factors: Vec<u32> = j.iter().map(|x| x.factor().try_into().unwrap()).collect();
        assert_eq!(factors, vec![1, 3, 3, 1]);

        // m=3, d=3: binomial(5,3) = 10 indices
        assert_eq!(multi_index_set(3, 3).len(), 10);
    }

    #[test]
    fn cardinality_grid() {
        for m in 1..=4u32 {
            for d in 1..=6u32 {
                let expected = arith::binomial(u64::from(d - 1 + m), u64::from(d));
                assert_eq!(
                    BigUint::from(multi_index_set(m, d).len()),
                    expected,
                    "m={m} d={d}"
                );
            }
        }
    }

    #[test]
    fn expand_single_cube() {
        // F = x^3, m = 2: coefficients of (t1 a + t2 b)^3
        let fs = form_from_terms(3, 1, &[(1, &[3])]).unwrap();
        let sys = expand_multilinear(&fs, 2, &Budget::default()).unwrap();
        assert_eq!(sys.row_count(), 4);
        // Phi_(1,1,1) = a^3, Phi_(1,1,2) = 3 a^2 b, Phi_(1,2,2) = 3 a b^2, Phi_(2,2,2) = b^3
        let a = bs(&[2, 5]);
        let vals = sys.evaluate(&a).unwrap();
        assert_eq!(vals, bs(&[8, 60, 150, 125]));
    }

    #[test]
    fn expand_m1_is_the_form_itself() {
        let fs = three_cubes();
        let sys = expand_multilinear(&fs, 1, &Budget::default()).unwrap();
        assert_eq!(sys.row_count(), 1);
        assert_eq!(sys.component(0, 0), fs.form(0));
    }

    #[test]
    fn expand_three_cubes_m2() {
        let sys = expand_multilinear(&three_cubes(), 2, &Budget::default()).unwrap();
        // Phi_(1,1,2) = 3(x11^2 x21 + x12^2 x22 + x13^2 x23)
        let phi = sys.component(0, 1);
        assert_eq!(sys.index_set()[1].entries(), &[1, 1, 2]);
        let expected = SparsePoly::from_terms(
            6,
            vec![
                (vec![2, 0, 0, 1, 0, 0], b(3)),
                (vec![0, 2, 0, 0, 1, 0], b(3)),
                (vec![0, 0, 2, 0, 0, 1], b(3)),
            ],
        )
        .unwrap();
        assert_eq!(phi, &expected);
    }

    #[test]
    fn fermat_line_point_is_a_zero() {
        let sys = expand_multilinear(&fermat_quartic_surface(), 2, &Budget::default()).unwrap();
        let point = bs(&[1, -1, 0, 0, 0, 0, 1, -1]);
        let vals = sys.evaluate(&point).unwrap();
        assert_eq!(vals, bs(&[0, 0, 0, 0]));
    }

    #[test]
    fn evaluate_at_zero_and_length_checks() {
        let sys = expand_multilinear(&three_cubes(), 2, &Budget::default()).unwrap();
        let zeros = vec![BigInt::zero(); 6];
        assert!(sys.evaluate(&zeros).unwrap().iter().all(Zero::is_zero));
        assert!(sys.evaluate(&bs(&[1, 2, 3])).is_err());
        assert!(sys.jacobian_at(&bs(&[1, 2, 3])).is_err());
        assert!(sys.jacobian_via_contraction(&bs(&[1, 2, 3])).is_err());

        let m1 = expand_multilinear(&three_cubes(), 1, &Budget::default()).unwrap();
        assert_eq!(m1.evaluate(&bs(&[1, -1, 0])).unwrap(), bs(&[0]));
    }

    #[test]
    fn jacobian_examples() {
        // gradient of three cubes at (1,1,1) is (3,3,3)
        let m1 = expand_multilinear(&three_cubes(), 1, &Budget::default()).unwrap();
        let jac = m1.jacobian_at(&bs(&[1, 1, 1])).unwrap();
        assert_eq!(jac.matrix().rows(), 1);
        assert_eq!(jac.matrix().cols(), 3);
        assert_eq!(
            (0..3).map(|c| jac.entry(0, c).clone()).collect::<Vec<_>>(),
            bs(&[3, 3, 3])
        );

        // zero point gives the zero matrix for d >= 2
        let jac0 = m1.jacobian_at(&bs(&[0, 0, 0])).unwrap();
        assert!((0..3).all(|c| jac0.entry(0, c).is_zero()));

        // Fermat line point: row (rho=1, j=(1,1,2)), column (i=2, n=1) is 3
        let sys = expand_multilinear(&fermat_quartic_surface(), 2, &Budget::default()).unwrap();
        let point = bs(&[1, -1, 0, 0, 0, 0, 1, -1]);
        let jac = sys.jacobian_at(&point).unwrap();
        let row = sys.row_index(0, 1); // j = (1,1,2)
        let col = sys.column_index(1, 0); // block 2, coordinate 1 (zero-based 1, 0)
        assert_eq!(jac.entry(row, col), &b(3));
    }

    #[test]
    fn jacobian_routes_agree() {
        let systems = [
            (three_cubes(), 1u32),
            (three_cubes(), 2u32),
            (fermat_quartic_surface(), 2u32),
            (
                parse_form_system(
                    r#"{"degree":2,"variables":2,"forms":[
                        [{"exponents":[2,0],"coefficient":"1"},
                         {"exponents":[1,1],"coefficient":"-3"},
                         {"exponents":[0,2],"coefficient":"2"}]]}"#,
                )
                .unwrap(),
                2u32,
            ),
        ];
        for (fs, m) in systems {
            let sys = expand_multilinear(&fs, m, &Budget::default()).unwrap();
            let len = sys.variable_count();
            let point: Vec<BigInt> = (0..len).map(|k| b((k as i64 % 7) - 3)).collect();
            let a = sys.jacobian_at(&point).unwrap();
            let c = sys.jacobian_via_contraction(&point).unwrap();
            assert_eq!(a, c, "routes disagree for m={m}");
        }
    }

    #[test]
    fn expansion_identity_spot_check() {
        // F(t1 x1 + t2 x2) = sum_j prod t * Phi_j(xbar) at concrete integers
        let fs = three_cubes();
        let sys = expand_multilinear(&fs, 2, &Budget::default()).unwrap();
        let x1 = bs(&[2, -1, 3]);
        let x2 = bs(&[0, 4, -2]);
        let (t1, t2) = (b(5), b(-3));
        let combined: Vec<BigInt> = x1.iter().zip(&x2).map(|(a, c)| &t1 * a + &t2 * c).collect();
        let lhs = fs.evaluate(&combined).unwrap()[0].clone();
        let xbar: Vec<BigInt> = x1.iter().chain(&x2).cloned().collect();
        let phis = sys.evaluate(&xbar).unwrap();
        let mut rhs = BigInt::zero();
        for (jidx, j) in sys.index_set().iter().enumerate() {
            let mut t_mono = BigInt::one();
            for &e in j.entries() {
                t_mono *= if e == 1 { &t1 } else { &t2 };
            }
            rhs += t_mono * &phis[jidx];
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn term_cap_stops_expansion() {
        let tight = Budget {
            max_states: 10,
            max_terms: 2,
        };
        let err = expand_multilinear(&three_cubes(), 3, &tight).unwrap_err();
        assert!(matches!(err, Error::TermBudgetExceeded { .. }));
    }
}
