use thiserror::Error;

/// Errors produced by graph construction, the numerical kernels, and the
/// experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate undirected edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({0}, {1}) has zero weight")]
    ZeroWeight(usize, usize),

    #[error("edge ({0}, {1}) has a non-finite weight")]
    NonFiniteWeight(usize, usize),

    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    DisconnectedGraph(usize),

    #[error("adjacency matrix is not symmetric at ({0}, {1})")]
    AsymmetricAdjacency(usize, usize),

    #[error("signature has length {got}, graph has {expected} vertices")]
    BadSignatureLength { expected: usize, got: usize },

    #[error("signature entry {0} is not +1 or -1")]
    BadSignatureEntry(usize),

    #[error("no connected graph after {0} attempts; edge probability too small for n")]
    CannotConnect(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("{0} did not converge within {1} iterations")]
    NoConvergence(&'static str, usize),

    #[error("step size {eps} too large: eps * max degree = {product} must be below {limit}")]
    StepTooLarge { eps: f64, product: f64, limit: f64 },

    #[error("could not bracket the discrete-time threshold after {0} doublings")]
    BracketFailure(usize),

    #[error("exact frustration limited to n <= {cap}, graph has n = {n}")]
    TooLargeForExact { n: usize, cap: usize },

    #[error("frustration formulas disagree: {0} vs {1}")]
    FormulaMismatch(f64, f64),

    #[error("degenerate bound: n - 2*eps = {0} is not positive")]
    DegenerateBound(f64),

    #[error("unknown nonlinearity kind `{0}`")]
    UnknownKind(String),

    #[error("profile has {got} agents, graph has {expected}")]
    ProfileSize { expected: usize, got: usize },

    #[error("state became non-finite at step {0}")]
    NonFiniteState(usize),

    #[error("spectral summary lacks the discrete-time threshold; pass a step size")]
    MissingPi1d,

    #[error("sweep contains no `{0}` transition")]
    NoTransition(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for the CLI: 2 for input/config problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence(..)
            | Error::BracketFailure(_)
            | Error::NonFiniteState(_)
            | Error::FormulaMismatch(..)
            | Error::DegenerateBound(_)
            | Error::NotSymmetric(_)
            | Error::NoTransition(_)
            | Error::CannotConnect(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
