use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {0:?} lies outside the closed unit hypercube")]
    OutsideDomain(Vec<f64>),

    #[error("grid of {m} points per axis cannot resolve bandlimit {w} without aliasing")]
    Aliasing { m: usize, w: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frequency index component must be >= 1, got {0:?}")]
    InvalidFrequency(Vec<u32>),

    #[error("frequency {index:?} exceeds bandlimit {w}")]
    OutsideBandlimit { index: Vec<u32>, w: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("convexity sandwich violated at sample {point:?}: {detail}")]
    ConvexityViolation { point: Vec<f64>, detail: String },

    #[error("hessian asymmetry {asymmetry:e} at sample {point:?}")]
    AsymmetricHessian { point: Vec<f64>, asymmetry: f64 },

    #[error("strong convexity constant {lambda} exceeds 1/C_p = {bound}")]
    LambdaTooLarge { lambda: f64, bound: f64 },

    #[error("energy increased at step {step}: {before} -> {after}")]
    EnergyIncrease { step: usize, before: f64, after: f64 },

    #[error("iterate left the certified value box at step {step}: {detail}")]
    BoxEscape { step: usize, detail: String },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
