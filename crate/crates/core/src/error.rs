use num_bigint::BigUint;

/// Errors reported by the library.
///
/// `Parse` covers everything wrong with an input document (malformed JSON as
/// well as semantic violations such as a mixed-degree monomial); callers that
/// need to distinguish "bad input file" from "bad parameters" can match on it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input document is malformed or violates a schema invariant.
    #[error("parse error: {0}")]
    Parse(String),

    /// A matrix, vector or basis has the wrong dimensions.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A precondition on operation parameters is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An exhaustive enumeration would visit more states than the budget allows.
    #[error("enumeration budget exceeded: {what} needs {states} states, budget is {budget}")]
    BudgetExceeded {
        what: String,
        states: BigUint,
        budget: u64,
    },

    /// A symbolic expansion produced more terms than the configured cap.
    #[error("term budget exceeded: {what} exceeds the cap of {cap} terms")]
    TermBudgetExceeded { what: String, cap: usize },

    /// A self-check failed. This always indicates a bug in the solver, never
    /// a property of the input; it is reported rather than silently dropped.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
