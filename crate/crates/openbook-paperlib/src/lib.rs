//! Named curve systems, monodromy factorizations, and proof scripts on the
//! pages of the unit cotangent bundle open books.
//!
//! The engine crate knows nothing about particular surfaces; everything
//! specific lives here: chart data for the pages, the named curves drawn on
//! them, the positive factorizations built from those curves, and move
//! scripts replaying the displayed derivations.  Builders self-validate
//! (classification, intersection table, boundary behavior) before returning,
//! so a transcription error in the chart data surfaces loudly at build time.

use thiserror::Error as ThisError;

pub mod charts;
pub mod families;
pub mod props;
pub mod scripts;

pub use families::{build, NamedFamily, FAMILY_NAMES};
pub use scripts::{proof_script, ProofScript, SCRIPT_NAMES};

/// Errors from family construction and script assembly.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("unknown name: {name}")]
    UnknownName { name: String },
    #[error("parameter {parameter} is unsupported for {name}: {detail}")]
    UnsupportedParameter {
        name: String,
        parameter: usize,
        detail: String,
    },
    #[error("{name} failed self-validation: {reason}")]
    ValidationFailed { name: String, reason: String },
    #[error(transparent)]
    Core(#[from] openbook_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
