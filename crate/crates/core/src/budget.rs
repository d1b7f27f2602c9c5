use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Resource limits for exhaustive enumeration and symbolic expansion.
///
/// Every operation that walks a residue space checks the number of states
/// against `max_states` *before* enumerating, and every symbolic expansion
/// checks intermediate term counts against `max_terms`. Both limits exist to
/// turn combinatorial explosion into an explicit error instead of a hang.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of candidate states an enumeration may visit.
    pub max_states: u64,
    /// Maximum number of monomials any single expanded polynomial may hold.
    pub max_terms: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_states: 100_000_000,
            max_terms: 1_000_000,
        }
    }
}

impl Budget {
    pub fn with_max_states(max_states: u64) -> Self {
        Budget {
            max_states,
            ..Budget::default()
        }
    }

    /// Checks that `states` fits the budget and returns it as a `u64`.
    pub fn admit_states(&self, what: &str, states: &BigUint) -> Result<u64> {
        if states > &BigUint::from(self.max_states) {
            return Err(Error::BudgetExceeded {
                what: what.to_string(),
                states: states.clone(),
                budget: self.max_states,
            });
        }
        // Fits u64 because max_states does.
        let digits = states.to_u64_digits();
        Ok(*digits.first().unwrap_or(&0))
    }

    pub fn admit_terms(&self, what: &str, terms: usize) -> Result<()> {
        if terms > self.max_terms {
            return Err(Error::TermBudgetExceeded {
                what: what.to_string(),
                cap: self.max_terms,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admits_within_budget() {
        let b = Budget::with_max_states(100);
        assert_eq!(b.admit_states("test", &BigUint::from(100u32)).unwrap(), 100);
        assert_eq!(b.admit_states("test", &BigUint::from(0u32)).unwrap(), 0);
    }

    #[test]
    fn rejects_above_budget() {
        let b = Budget::with_max_states(100);
        let err = b.admit_states("gamma", &BigUint::from(101u32)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
