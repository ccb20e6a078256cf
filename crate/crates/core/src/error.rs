use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("radius {r} is below the minimal edge length {u}")]
    RadiusTooSmall { r: f64, u: f64 },
    #[error("ball of radius {radius} around vertex {center} reaches the artificial boundary of the ambient graph")]
    TouchesBoundary { center: usize, radius: f64 },
    #[error("interior and exterior regions overlap: r = {r} < 6U = {limit}")]
    RegionsOverlap { r: f64, limit: f64 },
    #[error("mesh size {h} exceeds u/8 = {limit}")]
    MeshTooCoarse { h: f64, limit: f64 },
    #[error("no vertex condition for vertex {0}")]
    MissingCondition(usize),
    #[error("invalid vertex condition: {0}")]
    BadCondition(String),
    #[error("lambda = {lambda} is within {distance:e} of the spectrum")]
    Resonance { lambda: f64, distance: f64 },
    #[error("lambda = {0} does not lie in a spectral gap")]
    NotInGap(f64),
    #[error("power iteration did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("singular matrix")]
    Singular,
    #[error("parameter relation violated: {0}")]
    Relation(String),
    #[error("geometry precondition violated: {0}")]
    Geometry(String),
    #[error("found {0} pairwise disjoint bad balls (at most 3 allowed)")]
    TooManyBadBalls(usize),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
