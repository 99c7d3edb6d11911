//! Combinatorial engine for curves, Dehn twists, and open-book monodromy
//! on compact oriented surfaces with boundary.
//!
//! The crate is organized bottom-up:
//!
//! * [`surface`] — polygon gluings and triangulations,
//! * [`curves`] — embedded curves/arcs in normal position, isotopy,
//!   geometric intersection numbers,
//! * [`mcg`] — Dehn twists, twist words, equality via the Alexander
//!   method, induced action on homology,
//! * [`factorization`] — monodromy factorizations, Hurwitz moves,
//!   stabilization, move scripts,
//! * [`invariants`] — Smith normal form and first homology of pages,
//!   open books, and Lefschetz fibration total spaces,
//! * [`chart`] — conversion of exact rational polyline drawings into
//!   crossing sequences.

pub mod chart;
pub mod curves;
pub mod error;
pub mod factorization;
pub mod invariants;
pub mod mcg;
pub mod surface;

mod hash;

pub use error::{Error, Result};
pub use hash::canonical_json_sha256;
