//! Floater-vision simulation and OCR-based readability analysis.
//!
//! - [`sim`]: floater chains, drift field, constraint solver, adaptation fade.
//! - [`raster`]: floater shadows, text pages, overlays, clarity grids.
//! - [`metrics`]: WER/CER, confidence, paired permutation tests.
//! - [`pipeline`]: readability experiments with mock or external OCR.
//! - [`cli`]: the `floatlab` command line.

pub mod cli;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
