//! Error type shared by all engine modules.

use thiserror::Error;

/// Errors produced by surface building, curve validation, mapping-class
/// operations, and script execution.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polygon specification is invalid: {reason}")]
    InvalidSpec { reason: String },
    #[error("identification directions force an orientation-reversing gluing: {detail}")]
    NonOrientableGluing { detail: String },
    #[error("gluing leaves no boundary sides; closed surfaces are unsupported")]
    ClosedSurface,
    #[error("glued complex is disconnected")]
    Disconnected,
    #[error("vertex class of polygon {polygon} corner {corner} lies in the interior; all vertices must be on the boundary")]
    InteriorVertex { polygon: String, corner: usize },
    #[error("edge flip pass did not terminate: {detail}")]
    FlipLimitExceeded { detail: String },
    #[error("curve data does not describe an embedded curve: {reason}")]
    NotEmbedded { reason: String },
    #[error("objects live on different pages")]
    PageMismatch,
    #[error("Dehn twists along trivial (disk-bounding) curves are not allowed")]
    TrivialTwistCurve,
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("script step {index} failed: {reason}")]
    StepFailed { index: usize, reason: String },
    #[error("arc endpoints must be distinct boundary vertices")]
    ArcEndpointsNotOnBoundary,
    #[error("arc data does not describe an embedded arc: {reason}")]
    ArcNotEmbedded { reason: String },
    #[error("chart conversion failed: {reason}")]
    Chart { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
