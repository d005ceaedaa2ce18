//! Structured run configuration. Loaded from a TOML file with unknown keys
//! rejected; command-line flags override individual fields.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use ocrtune::ocr::{ExternalEngine, MockEngine, NoiseProfile, OcrEngine};
use ocrtune::tuner::{Aggregation, TunerConfig};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Caps concurrent document evaluations (and so external OCR processes).
    pub workers: Option<usize>,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub tuner: TunerSection,
    #[serde(default)]
    pub synth: SynthSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    /// `mock` or `external`.
    pub kind: String,
    pub mock_seed: Option<u64>,
    pub reject_threshold: Option<u32>,
    pub binary: Option<PathBuf>,
    pub language: Option<String>,
    #[serde(default)]
    pub extra_args: Vec<String>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            kind: "mock".into(),
            mock_seed: None,
            reject_threshold: None,
            binary: None,
            language: None,
            extra_args: Vec::new(),
        }
    }
}

impl EngineConfig {
    pub fn build(&self) -> Result<OcrEngine, String> {
        match self.kind.as_str() {
            "mock" => {
                let mut engine = MockEngine::new(self.mock_seed.unwrap_or(0));
                if let Some(t) = self.reject_threshold {
                    engine.reject_threshold = t;
                }
                Ok(OcrEngine::Mock(engine))
            }
            "external" => {
                let mut engine = ExternalEngine::new(
                    self.binary.clone(),
                    self.language.clone().unwrap_or_else(|| "por".into()),
                );
                engine.extra_args = self.extra_args.clone();
                Ok(OcrEngine::External(engine))
            }
            other => Err(format!("engine kind must be `mock` or `external`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunerSection {
    pub population: Option<usize>,
    pub generations: Option<usize>,
    pub crossover_rate: Option<f64>,
    pub mutation_rate: Option<f64>,
    /// `sum` or `mean`.
    pub aggregation: Option<String>,
}

impl TunerSection {
    pub fn build(&self, seed: u64) -> Result<TunerConfig, String> {
        let mut config = TunerConfig::new(seed);
        if let Some(v) = self.population {
            config.population_size = v;
        }
        if let Some(v) = self.generations {
            config.generations = v;
        }
        if let Some(v) = self.crossover_rate {
            config.crossover_rate = v;
        }
        if self.mutation_rate.is_some() {
            config.mutation_rate = self.mutation_rate;
        }
        if let Some(agg) = &self.aggregation {
            config.aggregation = match agg.as_str() {
                "sum" => Aggregation::Sum,
                "mean" => Aggregation::Mean,
                other => return Err(format!("aggregation must be `sum` or `mean`, got `{other}`")),
            };
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub count: Option<usize>,
    pub noise_p: Option<f64>,
    pub contrast: Option<f64>,
    pub background: Option<u8>,
    /// typology label -> proportion.
    #[serde(default)]
    pub mix: BTreeMap<String, f64>,
}

impl SynthSection {
    pub fn noise(&self) -> NoiseProfile {
        NoiseProfile {
            salt_pepper_p: self.noise_p.unwrap_or(0.0),
            contrast_scale: self.contrast.unwrap_or(1.0),
            background: self.background.unwrap_or(255),
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}
