//! Exact arithmetic for systems of integer forms and the linear spaces they
//! contain: multilinear expansion, Hensel lifting of non-singular approximate
//! zeros, exhaustive congruence counting, and p-adic local densities with two
//! mutually cross-checking evaluation routes.
//!
//! The library works with a system of `R` homogeneous forms of common degree
//! `d` in `s` integer variables. Substituting a parametrized linear space
//! `t_1 x_1 + .. + t_m x_m` and collecting coefficients of the `t`-monomials
//! turns "the system vanishes on a linear space" into a plain system of
//! `R * binomial(d-1+m, d)` integer polynomial equations in `m*s` unknowns
//! ([`forms::expand_multilinear`]). Everything else operates on that expanded
//! system:
//!
//! * [`hensel`] finds certified approximate zeros in residue rings and lifts
//!   them to arbitrary p-adic precision, re-verifying every step;
//! * [`counting`] counts congruence solutions and certified-seed classes by
//!   partitioned brute force, deterministically for any worker count;
//! * [`density`] assembles local-density traces, evaluates the
//!   exponential-sum expression along two independent routes, and computes
//!   the explicit numeric bounds attached to the parameters.
//!
//! All core arithmetic is arbitrary-precision and exact; floating point
//! appears only in the deliberately-approximate exponential-sum route, which
//! exists to cross-check the exact one.
//!
//! A walk-through guide with runnable examples lives in the `book/` directory
//! of the repository; its code blocks compile and run as doc-tests of this
//! crate.

pub mod arith;
pub mod budget;
pub mod counting;
pub mod density;
mod enumerate;
pub mod error;
pub mod forms;
pub mod hensel;
pub mod linalg;
pub mod poly;

pub use budget::Budget;
pub use counting::{count_m, count_rational_points, gamma_m, verify_lifting_bound, CountReport};
pub use density::{
    bounds_sheet, chi_expsum_partial, chi_trace, kappa_bound, BoundsSheet, DensityTrace,
};
pub use error::{Error, Result};
pub use forms::{
    expand_multilinear, multi_index_set, parse_form_system, FormSystem, JacobianEvaluation,
    Monomial, MultiIndex, MultilinearSystem,
};
pub use hensel::{
    find_seeds, lift_step, lift_to_precision, matrix_order, restrict_to_subspace, LiftState,
    MatrixOrder, PAdicPoint, SeedPoint,
};

/// Doc-tested chapters of the guide; see `book/src/`.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(forms, "../../../book/src/forms.md");
    chapter!(expansion, "../../../book/src/expansion.md");
    chapter!(lifting, "../../../book/src/lifting.md");
    chapter!(counting, "../../../book/src/counting.md");
    chapter!(densities, "../../../book/src/densities.md");
    chapter!(cli, "../../../book/src/cli.md");
}
