use thiserror::Error;

/// Which clause of the delta-closeness test failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosenessCondition {
    /// An interval of the partition cannot be made narrower than delta.
    IntervalWidth,
    /// An eigenvalue below the cutoff is not covered by any interval.
    Coverage,
    /// Interval cardinalities of the two datasets disagree.
    Cardinality,
}

impl std::fmt::Display for ClosenessCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClosenessCondition::IntervalWidth => write!(f, "i (interval width)"),
            ClosenessCondition::Coverage => write!(f, "ii (coverage)"),
            ClosenessCondition::Cardinality => write!(f, "iii (cardinality)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {0:?} lies outside the manifold")]
    PointOutsideDomain(String),

    #[error("datasets are not delta-close: condition {condition} violated")]
    Infeasible { condition: ClosenessCondition },

    #[error("radial eigensolver failed self-convergence test: {0}")]
    DiscretizationFailure(String),

    #[error("control minimization did not converge; residual {residual}")]
    NotConverged { residual: f64 },

    #[error("side lengths violate the triangle inequality: {0}")]
    DegenerateTriangle(String),

    #[error("edge graph is disconnected ({components} components)")]
    DisconnectedNet { components: usize },

    #[error("input too large for exhaustive search: {0}")]
    SizeLimit(String),

    #[error("partition has {parts} parts; inclusion-exclusion capped at {max} (override l_max to proceed)")]
    ComplexityGuard { parts: usize, max: usize },

    #[error("metric axiom violated: {0}")]
    MetricViolation(String),

    #[error("pipeline stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
