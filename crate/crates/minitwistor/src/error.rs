//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    #[error("undeclared identifier `{0}`")]
    UndeclaredIdentifier(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("sqrt argument at offset {offset} is not a declared root polynomial")]
    NotARootPolynomial { offset: usize },

    #[error("division by zero in exact arithmetic")]
    DivisionByZero,

    #[error("variable order of operands is incompatible")]
    VariableOrderConflict,

    #[error("resultant: variable `{0}` absent from both inputs")]
    ResultantVariableAbsent(String),

    #[error("resultant: inputs must be nonzero")]
    ResultantZeroInput,

    #[error("substitution target still contains root symbols")]
    SubstitutionIntoRoots,

    #[error("missing assignment for variable `{0}`")]
    MissingAssignment(String),

    #[error("missing branch data for root `{0}`")]
    MissingBranchValue(String),

    #[error("branch value for `{0}` does not square to its defining polynomial at the base point")]
    InvalidBranchValue(String),

    #[error("evaluation at a pole: |denominator| = {denom_abs:.3e}")]
    PoleEncountered { denom_abs: f64 },

    #[error("branch point crossed for root `{root}`: |defining poly| = {d_abs:.3e} along the continuation path")]
    BranchPointCrossed { root: String, d_abs: f64 },

    #[error("analytic continuation failed to resolve root `{root}` (subdivision limit reached)")]
    ContinuationStalled { root: String },

    #[error("invariant `{name}` violated: {detail}")]
    InvariantViolation { name: &'static str, detail: String },

    #[error("family invalid at this parameter point: {0}")]
    FamilyInvalid(String),

    #[error("Laurent window tail decay failure: |tail| = {tail:.3e} exceeds {tol:.3e} (pole near the circle or window too small)")]
    TailDecay { tail: f64, tol: f64 },

    #[error("residual {value:.3e} exceeds tolerance {tol:.3e} for {what}")]
    ResidualExceeded {
        what: &'static str,
        value: f64,
        tol: f64,
    },

    #[error("sample matrix is rank deficient")]
    RankDeficient,

    #[error("linear solver failed: {0}")]
    SolverFailure(&'static str),

    #[error("initial vector is not tangent to the point constraint: |<V, dphi>| = {0:.3e}")]
    NotTangent(f64),

    #[error("geodesic left the validity neighbourhood at s = {s:.4}")]
    LeftValidityRegion { s: f64 },

    #[error("step underflow at s = {s:.4} (integration near a singularity)")]
    StepUnderflow { s: f64 },

    #[error("zero set changed cardinality along the path: {was} -> {now} at s = {s:.4}")]
    ZeroSetCardinality { was: usize, now: usize, s: f64 },

    #[error("section is not quadratic: detected degree {0}")]
    SectionNotQuadratic(i32),

    #[error("metric is singular at the evaluation point")]
    SingularMetric,

    #[error("coordinate map has a singular Jacobian at a grid point")]
    SingularJacobian,

    #[error("branched cover obstruction: n must be >= 2, got {0}")]
    InvalidCoverOrder(i64),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown builder `{0}` (expected `quadric-11` or `branched-cover-12`)")]
    UnknownBuilder(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code classification: 2 for input errors, 1 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. }
            | Error::UndeclaredIdentifier(_)
            | Error::UnknownVariable(_)
            | Error::NotARootPolynomial { .. }
            | Error::Config(_)
            | Error::UnknownBuilder(_)
            | Error::InvalidCoverOrder(_)
            | Error::Io(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
