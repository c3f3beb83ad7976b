//! Finite, exact models of Lawvere theories.
//!
//! The crate works at the level of isomorphism classes: spans of finite sets
//! are stored as fiber-count matrices, theories as presentations with
//! optional normal forms, and models as operation tables on `{0, .., n-1}`.

pub mod error;
pub mod finset;
pub mod gsets;
pub mod kronecker;
pub mod models;
pub mod semimat;
pub mod spancat;
pub mod theory;

pub use error::{Error, Result};
