use thiserror::Error;

/// Errors raised by the geometry, chart, solver and structure-equation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis vectors are linearly dependent (|u ^ v| = {norm:.3e})")]
    DegenerateBasis { norm: f64 },
    #[error("point is off the Klein quadric: |X| = {x_norm:.6}, |Y| = {y_norm:.6}")]
    NotOnQuadric { x_norm: f64, y_norm: f64 },
    #[error("matrix is not a complex structure: |J^2 + 1| = {deviation:.3e}")]
    NotAComplexStructure { deviation: f64 },
    #[error("line congruence is not elliptic (margin {margin:.3e})")]
    NotElliptic { margin: f64 },
    #[error("root finder stalled with residual {residual:.3e}")]
    NoConvergence { residual: f64 },
    #[error("plane lies on the congruence (distance {distance:.3e})")]
    NotTotallyReal { distance: f64 },
    #[error("continuation did not close after {steps} steps")]
    TracingFailure { steps: usize },
    #[error("spherical mean is degenerate (norm {norm:.3e})")]
    MeanDegenerate { norm: f64 },
    #[error("linearization has rank {rank} < 2")]
    RankDeficient { rank: usize },
    #[error("fiber is not a graph over the anti-self-dual sphere")]
    NotGraph,
    #[error("grid too coarse: {n} points per direction (need at least {min})")]
    GridTooCoarse { n: usize, min: usize },
    #[error("iterate left the domain at |value| = {value:.6}")]
    DomainEscape { value: f64 },
    #[error("unknown builtin name `{0}`")]
    UnknownName(String),
    #[error("homotopic paths disagree by {gap:.3e}")]
    PathInconsistency { gap: f64 },
    #[error("constraint violated at {sample:?}: residual {residual:.3e}")]
    ConstraintViolated { sample: [f64; 6], residual: f64 },
    #[error("coframe is degenerate at {sample:?}")]
    Degenerate { sample: [f64; 6] },
    #[error("finite-difference stencil lost precision (condition {condition:.3e})")]
    StencilDegenerate { condition: f64 },
    #[error("Picard iteration did not converge in {iterations} iterations (last delta {delta:.3e})")]
    SolverNoConvergence { iterations: usize, delta: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Domain,
    Convergence,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NoConvergence { .. }
            | Error::TracingFailure { .. }
            | Error::SolverNoConvergence { .. }
            | Error::StencilDegenerate { .. } => ErrorClass::Convergence,
            Error::Invalid(_) | Error::UnknownName(_) | Error::GridTooCoarse { .. } => {
                ErrorClass::Input
            }
            _ => ErrorClass::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
