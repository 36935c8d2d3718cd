use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Error, Debug)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("domain tag mismatch: expected {expected} state, got {got}")]
    DomainMismatch { expected: &'static str, got: &'static str },
    #[error("states live on different grids")]
    GridMismatch,
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("lattice exceeds the grid Nyquist range: {0}")]
    LatticeBeyondNyquist(String),
    #[error("window normalization violated: ||g|| = {got:.6e}, required {required:.6e}")]
    Normalization { got: f64, required: f64 },
    #[error("boundary mass {mass:.3e} exceeds limit {limit:.1e}")]
    BoundaryMass { mass: f64, limit: f64 },
    #[error("too few samples for fit: {got} < {required}")]
    TooFewSamples { got: usize, required: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("flow blow-up at t = {t_last:.6}")]
    FlowBlowup { t_last: f64 },
    #[error("symbol is not usable with this method: {0}")]
    SymbolMismatch(String),
    #[error("fixed-point iteration failed to converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },
    #[error("caustic detected: min |det dx/dy| = {min_det:.3e} < {delta:.3e}")]
    Caustic { min_det: f64, delta: f64 },
    #[error("root finding failed: {0}")]
    RootFind(String),
    #[error("closedness violation {defect:.3e} in the recovered 1-form (non-symplectic input?)")]
    NotClosed { defect: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("weight overflow: {0}")]
    WeightOverflow(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("missing window-table node {0}")]
    MissingWindow(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("container format error: {0}")]
    Container(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
