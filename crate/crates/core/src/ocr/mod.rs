//! Uniform OCR boundary with two engines: an external process adapter and a
//! deterministic synthetic engine for closed-loop desk-scale testing.
//!
//! `recognize` calls are independent and safe to issue from a bounded worker
//! pool; callers cap external-process concurrency with the pool size.

pub mod external;
pub mod font;
pub mod mock;

pub use external::ExternalEngine;
pub use mock::{render_synthetic, MockEngine, NoiseProfile};

use crate::error::Result;
use crate::raster::Raster;

/// An OCR engine. Both variants are deterministic for a fixed configuration
/// and input raster (the external one as far as the binary itself is).
#[derive(Debug, Clone)]
pub enum OcrEngine {
    Mock(MockEngine),
    External(ExternalEngine),
}

impl OcrEngine {
    pub fn recognize(&self, raster: &Raster) -> Result<String> {
        match self {
            OcrEngine::Mock(engine) => Ok(engine.recognize(raster)),
            OcrEngine::External(engine) => engine.recognize(raster),
        }
    }
}
