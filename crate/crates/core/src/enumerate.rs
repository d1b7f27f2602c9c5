//! Shared machinery for exhaustive enumeration over residue spaces.
//!
//! Candidate vectors are indexed mixed-radix little-endian (coordinate 0
//! varies fastest). Work is partitioned into contiguous index ranges, one per
//! worker, and partial results are merged in range order, so every count and
//! every report is independent of the worker count.

use std::ops::Range;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::poly::SparsePoly;

/// Decodes a state index into coordinates, little-endian in a uniform radix.
pub(crate) fn decode_le(mut index: u64, radix: u64, out: &mut [u64]) {
    for slot in out.iter_mut() {
        *slot = index % radix;
        index /= radix;
    }
}

/// Odometer step; returns false on wrap-around.
pub(crate) fn increment_le(digits: &mut [u64], radix: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Runs `work` over `workers` contiguous chunks of `0..total` on scoped
/// threads and returns the per-chunk results in chunk order.
pub(crate) fn partitioned<T, F>(total: u64, workers: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
{
    let workers = workers.max(1);
    if workers == 1 || total <= 1 {
        return vec![work(0..total)];
    }
    let chunk = total.div_ceil(workers as u64);
    let ranges: Vec<Range<u64>> = (0..workers as u64)
        .map(|k| {
            let lo = (k * chunk).min(total);
            let hi = ((k + 1) * chunk).min(total);
            lo..hi
        })
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|range| scope.spawn(|| work(range)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("enumeration worker panicked"))
            .collect()
    })
}

/// One compiled term: reduced coefficient and the `(variable, exponent)`
/// pairs with positive exponent.
type CompiledTerm = (u64, Vec<(usize, u32)>);

/// A polynomial system compiled for fast evaluation modulo a fixed `u64`
/// modulus. Products are taken through `u128`, so any modulus below `2^64`
/// is safe.
pub(crate) struct ModSystem {
    modulus: u64,
    polys: Vec<Vec<CompiledTerm>>,
}

impl ModSystem {
    pub(crate) fn compile(polys: &[SparsePoly], modulus: u64) -> ModSystem {
        let m = BigInt::from(modulus);
        let polys = polys
            .iter()
            .map(|poly| {
                poly.terms()
                    .iter()
                    .filter_map(|(exps, coeff)| {
                        let c = coeff.mod_floor(&m);
                        let c = *c.to_u64_digits().1.first().unwrap_or(&0);
                        if c == 0 {
                            return None;
                        }
                        let vars: Vec<(usize, u32)> = exps
                            .iter()
                            .enumerate()
                            .filter(|&(_, &e)| e > 0)
                            .map(|(v, &e)| (v, e))
                            .collect();
                        Some((c, vars))
                    })
                    .collect()
            })
            .collect();
        ModSystem { modulus, polys }
    }

    fn eval_poly(&self, poly: &[CompiledTerm], point: &[u64]) -> u64 {
        let m = self.modulus as u128;
        let mut acc: u128 = 0;
        for (coeff, vars) in poly {
            let mut term = *coeff as u128;
            for &(var, exp) in vars {
                let x = point[var] as u128;
                for _ in 0..exp {
                    term = term * x % m;
                }
            }
            acc = (acc + term) % m;
        }
        acc as u64
    }

    /// True when every component vanishes at `point` (mod the modulus).
    pub(crate) fn vanishes(&self, point: &[u64]) -> bool {
        self.polys.iter().all(|p| self.eval_poly(p, point) == 0)
    }

    /// All component values at `point`.
    pub(crate) fn values(&self, point: &[u64]) -> Vec<u64> {
        self.polys
            .iter()
            .map(|p| self.eval_poly(p, point))
            .collect()
    }
}
