//! Discriminative non-orthogonal binary subspaces (DNBS) of Haar-like box
//! features, an SSD template tracker built on them, and an OTB-style
//! evaluation harness.

pub mod cli;
pub mod cluster;
pub mod doomp;
pub mod error;
pub mod eval;
pub mod haar;
pub mod raster;
pub mod subspace;
pub mod synthetic;
pub mod tracker;

pub use error::{Error, Result};
