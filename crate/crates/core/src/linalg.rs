//! Dense integer matrices and the exact linear algebra the lifting machinery
//! needs: fraction-free determinants, rank over Z/pZ, Smith normal form and a
//! solver for linear congruences modulo prime powers.
//!
//! Matrices here are small (a handful of rows and columns); everything is
//! exact `BigInt` arithmetic with no attention paid to asymptotics.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::error::{Error, Result};

/// Row-major dense matrix over the integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::ShapeMismatch(
                "matrix rows have unequal lengths".into(),
            ));
        }
        Ok(IntMatrix {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: BigInt) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// New matrix made of the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.cols) {
            return Err(Error::ShapeMismatch(format!(
                "column index {c} out of range for a matrix with {} columns",
                self.cols
            )));
        }
        let mut out = IntMatrix::zero(self.rows, columns.len());
        for r in 0..self.rows {
            for (j, &c) in columns.iter().enumerate() {
                out.set(r, j, self.get(r, c).clone());
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} against a matrix with {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = BigInt::zero();
                for (k, vk) in v.iter().enumerate() {
                    acc += self.get(i, k) * vk;
                }
                acc
            })
            .collect())
    }

    /// Exact determinant by the Bareiss fraction-free algorithm.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.data.clone();
        let at = |a: &Vec<BigInt>, r: usize, c: usize| a[r * n + c].clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if at(&a, k, k).is_zero() {
                match (k + 1..n).find(|&r| !at(&a, r, k).is_zero()) {
                    Some(r) => {
                        for c in 0..n {
                            a.swap(k * n + c, r * n + c);
                        }
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = at(&a, k, k) * at(&a, i, j) - at(&a, i, k) * at(&a, k, j);
                    a[i * n + j] = num / &prev;
                }
                a[i * n + k] = BigInt::zero();
            }
            prev = at(&a, k, k);
        }
        let det = at(&a, n - 1, n - 1);
        Ok(if sign < 0 { -det } else { det })
    }

    /// Rank over Z/pZ by Gaussian elimination.
    pub fn rank_mod_p(&self, p: u64) -> usize {
        let pb = BigInt::from(p);
        let mut a: Vec<Vec<u64>> = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| to_u64_residue(self.get(r, c), &pb))
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..self.rows).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(rank, pivot);
            let inv = modinv_u64(a[rank][col], p);
            for entry in a[rank][col..].iter_mut() {
                *entry = mulmod_u64(*entry, inv, p);
            }
            let pivot_row = a[rank].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != rank && row[col] != 0 {
                    let f = row[col];
                    for (entry, pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                        let sub = mulmod_u64(f, *pv, p);
                        *entry = (*entry + p - sub) % p;
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}

fn to_u64_residue(n: &BigInt, p: &BigInt) -> u64 {
    let r = n.mod_floor(p);
    let digits = r.to_u64_digits().1;
    *digits.first().unwrap_or(&0)
}

fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn modinv_u64(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p
    let mut exp = p - 2;
    let mut base = a % p;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_u64(acc, base, p);
        }
        base = mulmod_u64(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Lexicographic iterator over k-subsets of `{0, .., n-1}`.
pub struct Combinations {
    n: usize,
    k: usize,
    state: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let state = if k <= n { Some((0..k).collect()) } else { None };
        Combinations { n, k, state }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.state.clone()?;
        // advance
        let mut next = current.clone();
        let mut i = self.k;
        loop {
            if i == 0 {
                self.state = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - (self.k - i) {
                next[i] += 1;
                for j in i + 1..self.k {
                    next[j] = next[j - 1] + 1;
                }
                self.state = Some(next);
                break;
            }
        }
        Some(current)
    }
}

/// Smith normal form `U * A * V = D` with `U`, `V` unimodular and `D`
/// diagonal with nonnegative entries satisfying `d_1 | d_2 | ...`.
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let rows = a.rows();
    let cols = a.cols();
    let mut d = a.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let rank_bound = rows.min(cols);

    let swap_rows = |m: &mut IntMatrix, r1: usize, r2: usize| {
        if r1 != r2 {
            for c in 0..m.cols() {
                let tmp = m.get(r1, c).clone();
                m.set(r1, c, m.get(r2, c).clone());
                m.set(r2, c, tmp);
            }
        }
    };
    let swap_cols = |m: &mut IntMatrix, c1: usize, c2: usize| {
        if c1 != c2 {
            for r in 0..m.rows() {
                let tmp = m.get(r, c1).clone();
                m.set(r, c1, m.get(r, c2).clone());
                m.set(r, c2, tmp);
            }
        }
    };
    // row_i -= q * row_j
    let row_sub = |m: &mut IntMatrix, i: usize, j: usize, q: &BigInt| {
        for c in 0..m.cols() {
            let delta = q * m.get(j, c);
            m.set(i, c, m.get(i, c) - delta);
        }
    };
    let col_sub = |m: &mut IntMatrix, i: usize, j: usize, q: &BigInt| {
        for r in 0..m.rows() {
            let delta = q * m.get(r, j);
            m.set(r, i, m.get(r, i) - delta);
        }
    };

    let mut t = 0;
    while t < rank_bound {
        // pivot: entry of smallest nonzero magnitude in the trailing block
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d.get(i, j).is_zero()
                    && pivot.is_none_or(|(pi, pj)| d.get(i, j).abs() < d.get(pi, pj).abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut d, t, pi);
        swap_rows(&mut u, t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);

        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !d.get(i, t).is_zero() {
                    let q = d.get(i, t).div_floor(d.get(t, t));
                    row_sub(&mut d, i, t, &q);
                    row_sub(&mut u, i, t, &q);
                    if !d.get(i, t).is_zero() {
                        // remainder became the smaller pivot candidate
                        swap_rows(&mut d, t, i);
                        swap_rows(&mut u, t, i);
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !d.get(t, j).is_zero() {
                    let q = d.get(t, j).div_floor(d.get(t, t));
                    col_sub(&mut d, j, t, &q);
                    col_sub(&mut v, j, t, &q);
                    if !d.get(t, j).is_zero() {
                        swap_cols(&mut d, t, j);
                        swap_cols(&mut v, t, j);
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        t += 1;
    }

    // sign normalization
    for i in 0..rank_bound {
        if d.get(i, i).is_negative() {
            for c in 0..cols {
                let neg = -d.get(i, c);
                d.set(i, c, neg);
            }
            for c in 0..rows {
                let neg = -u.get(i, c);
                u.set(i, c, neg);
            }
        }
    }

    // divisibility chain d_i | d_{i+1}
    let mut i = 0;
    while i + 1 < rank_bound {
        let di = d.get(i, i).clone();
        let dn = d.get(i + 1, i + 1).clone();
        if di.is_zero() || dn.mod_floor(&di).is_zero() {
            i += 1;
            continue;
        }
        // fold d_{i+1} into the pivot position and re-reduce the 2x2 block
        for c in 0..cols {
            let add = d.get(i + 1, c).clone();
            d.set(i, c, d.get(i, c) + &add);
        }
        for c in 0..rows {
            let add = u.get(i + 1, c).clone();
            u.set(i, c, u.get(i, c) + &add);
        }
        // clearing restarts from this pivot
        let mut t = i;
        while t < rank_bound {
            loop {
                let mut clean = true;
                for r in t + 1..rows {
                    if !d.get(r, t).is_zero() {
                        let q = d.get(r, t).div_floor(d.get(t, t));
                        row_sub(&mut d, r, t, &q);
                        row_sub(&mut u, r, t, &q);
                        if !d.get(r, t).is_zero() {
                            swap_rows(&mut d, t, r);
                            swap_rows(&mut u, t, r);
                            clean = false;
                        }
                    }
                }
                for c in t + 1..cols {
                    if !d.get(t, c).is_zero() {
                        let q = d.get(t, c).div_floor(d.get(t, t));
                        col_sub(&mut d, c, t, &q);
                        col_sub(&mut v, c, t, &q);
                        if !d.get(t, c).is_zero() {
                            swap_cols(&mut d, t, c);
                            swap_cols(&mut v, t, c);
                            clean = false;
                        }
                    }
                }
                if clean {
                    break;
                }
            }
            if d.get(t, t).is_negative() {
                for c in 0..cols {
                    let neg = -d.get(t, c);
                    d.set(t, c, neg);
                }
                for c in 0..rows {
                    let neg = -u.get(t, c);
                    u.set(t, c, neg);
                }
            }
            t += 1;
        }
        i = 0; // the fold can disturb earlier pairs
    }

    SmithForm { u, d, v }
}

/// All solutions `y` (mod `p^k`) of `A y = rhs (mod p^k)`, sorted
/// lexicographically. `None` when the system is insoluble.
///
/// The solution count is checked against `max_solutions` before the set is
/// materialized.
pub fn solve_mod_prime_power(
    a: &IntMatrix,
    rhs: &[BigInt],
    p: u64,
    k: u32,
    max_solutions: u64,
) -> Result<Option<Vec<Vec<BigInt>>>> {
    if rhs.len() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side of length {} against a matrix with {} rows",
            rhs.len(),
            a.rows()
        )));
    }
    let modulus = BigInt::from(p).pow(k);
    let snf = smith_normal_form(a);
    let c = snf.u.mul_vec(rhs)?;
    let nvars = a.cols();
    let rank_bound = a.rows().min(nvars);

    // Per coordinate: base solution and the number/stride of extra choices.
    let mut base = vec![BigInt::zero(); nvars];
    let mut torsion: Vec<(usize, BigInt, u64)> = Vec::new(); // (index, stride, count)
    let mut total: u64 = 1;
    for (i, base_slot) in base.iter_mut().enumerate() {
        let di = if i < rank_bound {
            snf.d.get(i, i).clone()
        } else {
            BigInt::zero()
        };
        let ci = c.get(i).cloned().unwrap_or_else(BigInt::zero);
        let g = match arith::valuation(&di, p) {
            Some(v) if v < k => BigInt::from(p).pow(v),
            _ => modulus.clone(), // d_i = 0 mod p^k
        };
        if !ci.mod_floor(&g).is_zero() {
            return Ok(None);
        }
        let reduced_mod = &modulus / &g;
        if !reduced_mod.is_one() {
            let dg = (&di / &g).mod_floor(&reduced_mod);
            let cg = (&ci / &g).mod_floor(&reduced_mod);
            let inv = modinv_big(&dg, &reduced_mod)?;
            *base_slot = (cg * inv).mod_floor(&reduced_mod);
        }
        let count_big = g.to_biguint().expect("g is positive");
        let count = u64::try_from(&count_big).map_err(|_| Error::BudgetExceeded {
            what: "linear congruence solution set".into(),
            states: count_big.clone(),
            budget: max_solutions,
        })?;
        if count > 1 {
            torsion.push((i, reduced_mod.clone(), count));
            total = total
                .checked_mul(count)
                .ok_or_else(|| Error::BudgetExceeded {
                    what: "linear congruence solution set".into(),
                    states: num_bigint::BigUint::from(u64::MAX),
                    budget: max_solutions,
                })?;
        }
        if total > max_solutions {
            return Err(Error::BudgetExceeded {
                what: "linear congruence solution set".into(),
                states: num_bigint::BigUint::from(total),
                budget: max_solutions,
            });
        }
    }
    // leftover zero rows must be consistent
    for ci in c.iter().skip(rank_bound) {
        if !ci.mod_floor(&modulus).is_zero() {
            return Ok(None);
        }
    }

    let mut out = Vec::with_capacity(total as usize);
    let mut counters = vec![0u64; torsion.len()];
    loop {
        let mut z = base.clone();
        for (slot, &(idx, ref stride, _)) in torsion.iter().enumerate() {
            z[idx] = (&z[idx] + stride * BigInt::from(counters[slot])).mod_floor(&modulus);
        }
        let y = snf.v.mul_vec(&z)?;
        out.push(y.iter().map(|x| x.mod_floor(&modulus)).collect());
        // odometer
        let mut slot = 0;
        loop {
            if slot == torsion.len() {
                out.sort();
                out.dedup();
                return Ok(Some(out));
            }
            counters[slot] += 1;
            if counters[slot] < torsion[slot].2 {
                break;
            }
            counters[slot] = 0;
            slot += 1;
        }
    }
}

fn modinv_big(a: &BigInt, m: &BigInt) -> Result<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return Err(Error::InternalInconsistency(format!(
            "no inverse of {a} modulo {m}"
        )));
    }
    Ok(e.x.mod_floor(m))
}
