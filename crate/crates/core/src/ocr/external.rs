//! External OCR engine adapter.
//!
//! Communicates with the engine strictly through files and process
//! invocation: the raster goes out as a P5 graymap, the binary is called
//! with `(input, output base, -l language, extra args...)`, and the UTF-8
//! text comes back from `{output base}.txt`. This matches the Tesseract
//! command-line contract but works with any binary honoring it.

use std::path::PathBuf;
use std::process::Command;

use crate::error::{Error, Result};
use crate::pgm;
use crate::raster::Raster;

/// Environment variable overriding the configured binary path.
pub const BIN_ENV: &str = "OCRTUNE_OCR_BIN";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalEngine {
    pub binary: PathBuf,
    pub language: String,
    pub extra_args: Vec<String>,
}

impl ExternalEngine {
    /// Resolution order for the binary: `OCRTUNE_OCR_BIN`, then the explicit
    /// path, then plain `tesseract` on the search path.
    pub fn new(binary: Option<PathBuf>, language: impl Into<String>) -> Self {
        let binary = std::env::var_os(BIN_ENV)
            .map(PathBuf::from)
            .or(binary)
            .unwrap_or_else(|| PathBuf::from("tesseract"));
        ExternalEngine { binary, language: language.into(), extra_args: Vec::new() }
    }

    pub fn recognize(&self, raster: &Raster) -> Result<String> {
        let dir = tempfile::tempdir()
            .map_err(|e| Error::EngineFailure(format!("cannot create work dir: {e}")))?;
        let input = dir.path().join("page.pgm");
        let out_base = dir.path().join("page");
        pgm::write_p5(&input, raster)?;

        let mut cmd = Command::new(&self.binary);
        cmd.arg(&input).arg(&out_base).arg("-l").arg(&self.language).args(&self.extra_args);
        log::info!(
            "invoking OCR engine: {} {} {} -l {} {}",
            self.binary.display(),
            input.display(),
            out_base.display(),
            self.language,
            self.extra_args.join(" ")
        );
        let output = cmd.output().map_err(|e| {
            Error::EngineFailure(format!("cannot run {}: {e}", self.binary.display()))
        })?;
        if !output.status.success() {
            return Err(Error::EngineFailure(format!(
                "{} exited with {}: {}",
                self.binary.display(),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let text_path = out_base.with_extension("txt");
        let bytes = std::fs::read(&text_path).map_err(|e| {
            Error::EngineFailure(format!(
                "engine produced no {}: {e}; stderr: {}",
                text_path.display(),
                String::from_utf8_lossy(&output.stderr).trim()
            ))
        })?;
        String::from_utf8(bytes)
            .map_err(|e| Error::EngineFailure(format!("engine output is not UTF-8: {e}")))
    }
}
