//! Sparse sum-of-squares certificates for nonnegative functions on finite
//! abelian groups via chordal covers of Cayley graphs, and PSD lift
//! descriptions of the dual moment polytopes.

pub mod abelian;
pub mod certify;
pub mod cli;
pub mod covers;
pub mod error;
pub mod graphs;
pub mod hermitian;
pub mod moments;

pub use error::{Error, Result};
