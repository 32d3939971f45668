//! Eigenvalue lower bounds for the Dirichlet poly-Laplacian `(-Delta)^l`.
//!
//! The crate evaluates the classical and improved closed-form lower bounds,
//! computes discrete spectra to test them against, and checks the
//! intermediate inequalities (the one-dimensional moment lemma, symmetric
//! decreasing rearrangement, Fourier-side estimates) on concrete data.

pub mod bounds;
pub mod eigen;
pub mod fourier;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lemma;
pub mod rearrange;

pub use error::{Error, Result};
