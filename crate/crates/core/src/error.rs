use thiserror::Error;

/// Errors reported by the numerical and exact kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bubble degree must be >= 1, got {0}")]
    InvalidDegree(i64),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("quadrature did not converge: requested {requested:e}, achieved {achieved:e}")]
    QuadratureDidNotConverge { requested: f64, achieved: f64 },

    #[error("sampled range ends at r = {have:e}, need coverage up to r = {need:e}")]
    InsufficientRange { have: f64, need: f64 },

    #[error("grid too coarse: need at least {need} nodes, got {got}")]
    GridTooCoarse { need: usize, got: usize },

    #[error("decay-fit window [{lo}, {hi}] holds {got} nodes, need at least {need}")]
    WindowUndersampled {
        lo: f64,
        hi: f64,
        got: usize,
        need: usize,
    },

    #[error("chart mismatch: mode is in {mode}, system is in {system}")]
    ChartMismatch {
        mode: &'static str,
        system: &'static str,
    },

    #[error("grid map {0} cannot be used here")]
    UnsupportedGridMap(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("eigensolver did not converge for eigenvalue index {index}")]
    EigenNoConverge { index: usize },

    #[error("ODE step failure at x = {location:e} (step size {step:e})")]
    StepFailure { location: f64, step: f64 },

    #[error("unknown profile name: {0}")]
    UnknownProfile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
