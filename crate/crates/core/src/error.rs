use num_complex::Complex64;
use thiserror::Error;

use crate::solver::Classification;

/// Which half of a compensator a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyRole {
    Numerator,
    Denominator,
}

impl std::fmt::Display for PolyRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolyRole::Numerator => f.write_str("numerator"),
            PolyRole::Denominator => f.write_str("denominator"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid requirement: {0}")]
    InvalidRequirement(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("numerator degree {numerator} does not match denominator degree {denominator}")]
    DegreeMismatch {
        numerator: usize,
        denominator: usize,
    },

    #[error("numeric overflow evaluating polynomial at omega = {omega}")]
    NumericOverflow { omega: f64 },

    #[error("compensator has a pole at omega = {omega}")]
    PoleAtFrequency { omega: f64 },

    #[error("phase is undefined for a zero value")]
    UndefinedPhase,

    #[error("duplicate requirement frequency omega = {omega}")]
    DuplicateFrequency { omega: f64 },

    #[error("compensator order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error("even-order transcription requires an even order, got {0}")]
    OddOrder(usize),

    #[error("system is not uniquely solvable ({classification})")]
    SingularSystem { classification: Classification },

    #[error("solution residual {residual:e} exceeds bound {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("root iteration did not converge (best residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("complex roots present: {}", fmt_roots(.roots))]
    ComplexRootsPresent { roots: Vec<Complex64> },

    #[error("{role} is not factorable into real first-order sections: complex roots {}", fmt_roots(.roots))]
    NotFactorable {
        role: PolyRole,
        roots: Vec<Complex64>,
    },

    #[error("a cascade needs at least one section")]
    EmptyCascade,

    #[error("invalid frequency range: {0}")]
    InvalidRange(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),
}

pub(crate) fn fmt_roots(roots: &[Complex64]) -> String {
    roots
        .iter()
        .map(|z| {
            if z.im < 0.0 {
                format!("{}-{}j", z.re, -z.im)
            } else {
                format!("{}+{}j", z.re, z.im)
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
