use thiserror::Error;

/// Failure modes shared by every part of the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KdvError {
    #[error("elliptic modulus {0} outside [0, 1]")]
    ModulusOutOfRange(f64),

    #[error("complete elliptic integral diverges at k = {0}")]
    CompleteIntegralDiverges(f64),

    #[error("solution is singular near (t = {t}, x = {x})")]
    Singularity { t: f64, x: f64 },

    #[error("invalid solution parameters: {0}")]
    InvalidSolution(String),

    #[error("mesh tangling: spacing at index {index} is {spacing:e}")]
    Tangling { index: usize, spacing: f64 },

    #[error("non-finite value at node {index}")]
    Overflow { index: usize },

    #[error("singular linear system: pivot {pivot:e} at row {row}")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("interpolation target {x} outside [{lo}, {hi}]")]
    Extrapolation { x: f64, lo: f64, hi: f64 },

    #[error("duplicate interpolation node at {0}")]
    DuplicateNodes(f64),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid mesh layer: {0}")]
    InvalidLayer(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate regression data: {0}")]
    Degenerate(String),

    #[error("run aborted at step {step}: {source}")]
    Aborted {
        step: usize,
        #[source]
        source: Box<KdvError>,
    },
}

pub type Result<T> = std::result::Result<T, KdvError>;
