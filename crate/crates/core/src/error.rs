//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by simulation, estimation, and data ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The thinning bound was exceeded more than `max_refinements` times in a
    /// single lookahead window, which indicates a mis-specified rate.
    #[error("jump rate exceeded its local bound after {refinements} refinements (rate {rate} > bound {bound} near t = {t})")]
    RateBound {
        refinements: u32,
        rate: f64,
        bound: f64,
        t: f64,
    },

    /// More events than the configured cap before the horizon; the rate is
    /// likely explosive.
    #[error("event count exceeded the cap of {cap} before the horizon")]
    EventOverflow { cap: usize },

    /// A jump landed on the crossing surface, which the exact counter cannot
    /// attribute to either side.
    #[error("jump at t = {time} landed on the crossing surface")]
    JumpOnSurface { time: f64 },

    /// Normals are undefined at polyline vertices.
    #[error("normal undefined at polyline vertex ({x}, {y})")]
    VertexNormal { x: f64, y: f64 },

    /// The sample set cannot support a bandwidth (zero spread in some
    /// coordinate); jitter the data or handle the atom exactly.
    #[error("degenerate sample set: {0}")]
    DegenerateSamples(String),

    /// Bandwidth matrix is not symmetric positive-definite.
    #[error("bandwidth matrix is not symmetric positive-definite")]
    SingularBandwidth,

    /// Trajectories in a dataset do not share the same grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An operation that needs data received none.
    #[error("empty dataset")]
    EmptyDataset,

    /// Malformed input data (CSV contents, config values).
    #[error("data error: {0}")]
    Data(String),

    /// A numeric routine failed to converge or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
