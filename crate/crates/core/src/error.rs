use std::fmt;

use thiserror::Error;

/// A single field-level problem found while validating a [`crate::SimConfig`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl Violation {
    pub(crate) fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(Violation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", join(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("could not parse configuration: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error("non-finite initial velocity at node {node} (y = {y})")]
    Evaluation { node: usize, y: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate geometry: Jacobians must be positive (h = {h})")]
    Geometry { h: f64 },

    #[error("fixed-point iteration did not converge at t = {t} after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("particle left the fluid domain at t = {t} (h = {h})")]
    CollisionAbort { t: f64, h: f64 },

    #[error("linear solve failed at t = {t}: {reason}")]
    LinearSolveFailure { t: f64, reason: String },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("degenerate refinement study: {0}")]
    DegenerateStudy(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("quadrature produced a non-finite value at t = {t}")]
    Quadrature { t: f64 },
}

impl Error {
    /// Time at which a solver failure occurred, if the error carries one.
    pub fn failing_time(&self) -> Option<f64> {
        match *self {
            Error::NonConvergence { t, .. }
            | Error::CollisionAbort { t, .. }
            | Error::LinearSolveFailure { t, .. }
            | Error::Quadrature { t } => Some(t),
            _ => None,
        }
    }

    /// True for errors raised while integrating the dynamics.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::CollisionAbort { .. }
                | Error::LinearSolveFailure { .. }
                | Error::Geometry { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
