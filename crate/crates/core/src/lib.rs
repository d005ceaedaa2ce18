//! Workbench for tuning the parameters of image pre-processing operators
//! used ahead of OCR. It couples native grayscale operators with a
//! constrained two-objective NSGA-II over their parameter spaces, evaluates
//! scenarios per document typology, and compares them with nonparametric
//! tests.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod imaging;
pub mod metrics;
pub mod ocr;
pub mod params;
pub mod pgm;
pub mod raster;
pub mod tuner;

pub use error::{Error, Result};
pub use raster::{BorderMode, Raster, StructuringElement};
