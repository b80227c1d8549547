use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("chart coordinate {value} on axis {axis} is outside [{lo}, {hi}]")]
    OutOfChart {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("degenerate metric: smallest eigenvalue {0:e}")]
    DegenerateMetric(f64),
    #[error("unknown example manifold `{0}`")]
    UnknownExample(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("query point is not a Morse point: {0}")]
    NonMorsePoint(String),
    #[error("could not separate walk events near u = {u}: {detail}")]
    UnresolvedEvent { u: f64, detail: String },
    #[error("normal is not certified regular: {0}")]
    RegularityRequired(String),
    #[error("no witness found: {0}")]
    WitnessNotFound(String),
    #[error("tube radius {r} is not below the focal bound {bound}")]
    RadiusTooLarge { r: f64, bound: f64 },
    #[error("frame transport failed to close: {0}")]
    FrameFailure(String),
    #[error("query point lies on or within the tube radius of the core: distance {distance}, radius {radius}")]
    OnManifold { distance: f64, radius: f64 },
    #[error("tube/core pairing failed: {0}")]
    PairingFailure(String),
}
