use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("arm {arm} out of range for {n} arms")]
    ArmOutOfRange { arm: usize, n: usize },

    /// The design matrix is singular: some connected component has no samples.
    #[error("design matrix is singular: component {component} has no samples")]
    SingularDesign { component: usize },

    #[error("node {0} is isolated; K(i, G) is undefined")]
    IsolatedNode(usize),

    #[error("numerically degenerate influence factor at node {0}")]
    DegenerateInfluence(usize),

    #[error("empty active set")]
    EmptyActiveSet,

    #[error("multiple optimal arms: {0:?}")]
    MultipleOptima(Vec<usize>),

    /// A candidate graph is not γ-close at the requested level.
    #[error("candidate {index} is not {requested}-close ({})", describe_gamma(*.measured))]
    NotGammaClose {
        index: usize,
        requested: f64,
        measured: Option<f64>,
    },

    #[error("linear algebra failure: {0}")]
    Numerical(String),
}

fn describe_gamma(measured: Option<f64>) -> String {
    match measured {
        Some(g) => format!("measured gamma {g}"),
        None => "null spaces differ".into(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
