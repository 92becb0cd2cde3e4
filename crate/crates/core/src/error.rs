use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid degree {0}: the tree degree must be at least 3")]
    InvalidDegree(u32),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("ball of degree {d} and radius {radius} exceeds the size cap ({edges} > {cap} directed edges)")]
    SizeCap { d: u32, radius: u32, edges: u128, cap: u64 },

    #[error("vertex id {0} is out of range")]
    InvalidVertex(u32),

    #[error("edge id {0} is out of range")]
    InvalidEdge(u32),

    #[error("vertex set must not be empty")]
    EmptyVertexSet,

    #[error("vector length {got} does not match operator dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("neighbourhood of radius {radius} around vertex {vertex} leaves the ball")]
    NotInterior { vertex: u32, radius: u32 },

    #[error("subtree of depth {depth} behind edge {edge} leaves the ball")]
    EdgeNotInterior { edge: u32, depth: u32 },

    #[error("ball radius {radius} is too small: need at least {needed}")]
    RadiusTooSmall { radius: u32, needed: u32 },

    #[error("label domain mismatch: {0}")]
    Domain(String),

    #[error("enumeration of {configs} configurations exceeds the cap of {cap}")]
    EnumerationCap { configs: u128, cap: u64 },

    #[error("orbit averaging over {size} automorphisms is outside the exact-computation caps: {reason}")]
    OrbitCap { size: u128, reason: String },

    #[error("joint distribution is not exchangeable (max asymmetry {0:e})")]
    NotExchangeable(f64),

    #[error("duplicate label {0} in the encoded ball")]
    LabelCollision(f64),

    #[error("path reconstruction failed at position {position}: {matches} common labels")]
    PathReconstruction { position: usize, matches: usize },

    #[error("rule is not symmetric and well-definedness was requested")]
    AsymmetricRule,

    #[error("operator norm estimate {estimate} exceeds the bound {bound}")]
    NormBoundViolated { estimate: f64, bound: f64 },

    #[error("malformed label file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
