//! Error types shared by all modules.
//!
//! Validation of user-supplied parameters is reported through
//! [`ValidationReport`] so that callers (in particular the CLI) can surface
//! every violated constraint at once instead of failing on the first one.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// N must exceed 1 (N = 1 is the trivial fixed point, N < 1 is the
    /// mirror image of some N' > 1 and is rejected rather than aliased).
    ScalingRatio { n: f64 },
    /// h must be positive.
    LengthScale { h: f64 },
    /// Physically meaningful exponents lie strictly inside (0, 2).
    DeltaOutsidePhysical { delta: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ScalingRatio { n } => write!(f, "N must exceed 1 (got {n})"),
            Violation::LengthScale { h } => write!(f, "h must be positive (got {h})"),
            Violation::DeltaOutsidePhysical { delta } => {
                write!(f, "δ not in (0,2) (got {delta})")
            }
        }
    }
}

/// Outcome of a physical-admissibility check. Empty means admissible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            write!(f, "parameters admissible")
        } else {
            let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            write!(f, "{}", msgs.join("; "))
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter validation failed: {0}")]
    Validation(ValidationReport),

    #[error("malformed admissibility window: requires beta < alpha, got alpha={alpha}, beta={beta}")]
    InvalidWindow { alpha: f64, beta: f64 },

    #[error("exponent δ={delta} outside admissible window ({beta}, {alpha})")]
    InadmissibleExponent { delta: f64, alpha: f64, beta: f64 },

    #[error("{resource} budget exhausted: needed more than {cap}")]
    BudgetExhausted { resource: &'static str, cap: usize },

    #[error("invalid sampling range: {detail}")]
    BadRange { detail: String },

    #[error("{what} out of domain (got {value})")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("{what} overflows the scalar type")]
    Overflow { what: &'static str },

    #[error("kernel is singular at x=0 for δ ≥ 1")]
    SingularPoint,

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("degenerate curve: {detail}")]
    DegenerateCurve { detail: String },

    #[error("grid size M must be a power of two ≥ 8 (got {m})")]
    GridSize { m: usize },

    #[error("time step {dt} unstable: velocity-Verlet requires dt < {limit}")]
    UnstableDt { dt: f64, limit: f64 },
}
