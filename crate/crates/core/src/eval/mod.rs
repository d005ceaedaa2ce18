//! Scenario evaluation and statistical comparison: runs the
//! preprocess -> OCR -> metrics loop per document, collects per-document
//! records, compares scenario/operator columns with Friedman plus pairwise
//! one-sided Wilcoxon tests under Bonferroni, and renders CSV reports.

pub mod report;
pub mod stats;

pub use report::{compare_records, render_reports, ComparisonTable, MetricKind, PairComparison};
pub use stats::{
    bonferroni, friedman_test, wilcoxon_signed_rank, Alternative, ComparisonResult, Direction,
};

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::corpus::{Document, Typology};
use crate::error::Result;
use crate::imaging;
use crate::metrics::{self, ErrorCategory, MetricRecord};
use crate::ocr::OcrEngine;
use crate::params::{defaults, Operator, ParamAssignment};
use crate::pgm;

/// Where a scenario's parameter values come from.
#[derive(Debug, Clone)]
pub enum ScenarioSource {
    /// Raster goes to the engine untouched.
    NoPreprocess,
    /// Documented default parameters of the operator.
    Defaults,
    /// One assignment for every document.
    Fixed(ParamAssignment),
    /// Assignment looked up by document typology.
    PerTypology(BTreeMap<Typology, ParamAssignment>),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub label: String,
    pub source: ScenarioSource,
}

impl Scenario {
    pub fn none() -> Self {
        Scenario { label: "none".into(), source: ScenarioSource::NoPreprocess }
    }

    pub fn defaults() -> Self {
        Scenario { label: "default".into(), source: ScenarioSource::Defaults }
    }

    pub fn global(assignment: ParamAssignment) -> Self {
        Scenario { label: "global".into(), source: ScenarioSource::Fixed(assignment) }
    }

    pub fn per_typology(map: BTreeMap<Typology, ParamAssignment>) -> Self {
        Scenario { label: "typology".into(), source: ScenarioSource::PerTypology(map) }
    }
}

/// One per-document measurement row.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub scenario: String,
    pub operator: String,
    pub doc_id: String,
    pub typology: Typology,
    pub metrics: MetricRecord,
    pub category: ErrorCategory,
}

impl EvalRecord {
    /// Column label identifying the (scenario, operator) pair in reports.
    pub fn column(&self) -> String {
        column_label(&self.scenario, &self.operator)
    }
}

pub fn column_label(scenario: &str, operator: &str) -> String {
    if scenario == "none" {
        "none".to_string()
    } else {
        format!("{scenario}:{operator}")
    }
}

/// Evaluates one scenario over the documents: preprocess (unless the
/// scenario is `none`), recognize, compute every metric. Per-document
/// failures are logged and scored as an empty OCR output rather than
/// aborting the run.
pub fn evaluate_scenario(
    docs: &[Document],
    scenario: &Scenario,
    operator: Option<Operator>,
    engine: &OcrEngine,
) -> Result<Vec<EvalRecord>> {
    let operator_label = match (&scenario.source, operator) {
        (ScenarioSource::NoPreprocess, _) => "none".to_string(),
        (_, Some(op)) => op.id().to_string(),
        (_, None) => {
            return Err(crate::Error::InvalidParameter(format!(
                "scenario `{}` needs an operator",
                scenario.label
            )))
        }
    };
    let records: Vec<EvalRecord> = docs
        .par_iter()
        .map(|doc| {
            let outcome = run_one(doc, scenario, operator, engine);
            let (metrics, category) = match outcome {
                Ok(pair) => pair,
                Err(e) => {
                    log::warn!(
                        "scenario {} document {}: {e}; scoring as empty output",
                        scenario.label,
                        doc.id
                    );
                    let gt = std::fs::read_to_string(&doc.transcription_path).unwrap_or_default();
                    let gt = if gt.trim().is_empty() { "?".to_string() } else { gt };
                    (
                        metrics::compute_record(&gt, "").expect("non-empty ground truth"),
                        metrics::classify_errors(&gt, ""),
                    )
                }
            };
            EvalRecord {
                scenario: scenario.label.clone(),
                operator: operator_label.clone(),
                doc_id: doc.id.clone(),
                typology: doc.typology,
                metrics,
                category,
            }
        })
        .collect();
    Ok(records)
}

fn run_one(
    doc: &Document,
    scenario: &Scenario,
    operator: Option<Operator>,
    engine: &OcrEngine,
) -> Result<(MetricRecord, ErrorCategory)> {
    let raster = pgm::read_p5(&doc.image_path)?;
    let gt = std::fs::read_to_string(&doc.transcription_path)
        .map_err(|e| crate::Error::io(&doc.transcription_path, e))?;
    let preprocessed = match &scenario.source {
        ScenarioSource::NoPreprocess => raster,
        ScenarioSource::Defaults => {
            let op = operator.expect("checked by evaluate_scenario");
            imaging::apply(&defaults(op), &raster)?
        }
        ScenarioSource::Fixed(assignment) => imaging::apply(assignment, &raster)?,
        ScenarioSource::PerTypology(map) => {
            let assignment = map.get(&doc.typology).ok_or_else(|| {
                crate::Error::NotFound(format!(
                    "no tuned assignment for typology {}",
                    doc.typology
                ))
            })?;
            imaging::apply(assignment, &raster)?
        }
    };
    let text = engine.recognize(&preprocessed)?;
    Ok((metrics::compute_record(&gt, &text)?, metrics::classify_errors(&gt, &text)))
}

/// Contingency counts of error categories per operator column, categories in
/// the fixed reporting order.
pub fn error_frequency_table(records: &[EvalRecord]) -> BTreeMap<String, [u64; 8]> {
    let mut table: BTreeMap<String, [u64; 8]> = BTreeMap::new();
    for record in records {
        let counts = table.entry(record.column()).or_insert([0; 8]);
        let idx = ErrorCategory::ALL.iter().position(|c| *c == record.category).unwrap();
        counts[idx] += 1;
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SynthSpec};
    use crate::ocr::{MockEngine, NoiseProfile};

    fn corpus(dir: &std::path::Path, noise: NoiseProfile, count: usize) -> Vec<Document> {
        let spec = SynthSpec {
            count,
            mix: BTreeMap::from([(Typology::Letter, 0.5), (Typology::TheatrePlayCover, 0.5)]),
            noise,
            seed: 99,
        };
        generate_synthetic(dir, &spec).unwrap()
    }

    #[test]
    fn none_scenario_on_clean_corpus_is_perfect() {
        let dir = tempfile::tempdir().unwrap();
        let docs = corpus(dir.path(), NoiseProfile::clean(), 6);
        let engine = OcrEngine::Mock(MockEngine::new(1));
        let records = evaluate_scenario(&docs, &Scenario::none(), None, &engine).unwrap();
        assert_eq!(records.len(), 6);
        for r in &records {
            assert_eq!(r.metrics.character_accuracy, 100.0, "{}", r.doc_id);
            assert_eq!(r.category, ErrorCategory::None);
            assert_eq!(r.operator, "none");
        }
    }

    #[test]
    fn default_scenario_requires_operator() {
        let dir = tempfile::tempdir().unwrap();
        let docs = corpus(dir.path(), NoiseProfile::clean(), 2);
        let engine = OcrEngine::Mock(MockEngine::new(1));
        assert!(evaluate_scenario(&docs, &Scenario::defaults(), None, &engine).is_err());
        let records =
            evaluate_scenario(&docs, &Scenario::defaults(), Some(Operator::GaussianBlur), &engine)
                .unwrap();
        assert_eq!(records[0].operator, "gaussian_blur");
        assert_eq!(records[0].column(), "default:gaussian_blur");
    }

    #[test]
    fn typology_scenario_resolves_by_document_type() {
        let dir = tempfile::tempdir().unwrap();
        let noise = NoiseProfile { salt_pepper_p: 0.2, contrast_scale: 1.0, background: 255 };
        let docs = corpus(dir.path(), noise, 6);
        let engine = OcrEngine::Mock(MockEngine::new(1));
        // letters get the identity ksize, theatre covers a destructive one
        let map = BTreeMap::from([
            (
                Typology::Letter,
                ParamAssignment::from_values(Operator::MedianBlur, vec![1]).unwrap(),
            ),
            (
                Typology::TheatrePlayCover,
                ParamAssignment::from_values(Operator::MedianBlur, vec![31]).unwrap(),
            ),
        ]);
        let tuned = evaluate_scenario(
            &docs,
            &Scenario::per_typology(map),
            Some(Operator::MedianBlur),
            &engine,
        )
        .unwrap();
        let none = evaluate_scenario(&docs, &Scenario::none(), None, &engine).unwrap();
        // identity ksize must reproduce the none scenario per letter document
        for (t, n) in tuned.iter().zip(&none) {
            assert_eq!(t.doc_id, n.doc_id);
            if t.typology == Typology::Letter {
                assert_eq!(t.metrics.character_accuracy, n.metrics.character_accuracy);
            } else {
                assert!(t.metrics.character_accuracy < n.metrics.character_accuracy);
            }
        }
    }

    #[test]
    fn error_table_partitions_records() {
        let dir = tempfile::tempdir().unwrap();
        let noise = NoiseProfile { salt_pepper_p: 0.25, contrast_scale: 1.0, background: 255 };
        let docs = corpus(dir.path(), noise, 8);
        let engine = OcrEngine::Mock(MockEngine::new(1));
        let mut records = evaluate_scenario(&docs, &Scenario::none(), None, &engine).unwrap();
        records.extend(
            evaluate_scenario(
                &docs,
                &Scenario::defaults(),
                Some(Operator::MedianBlur),
                &engine,
            )
            .unwrap(),
        );
        let table = error_frequency_table(&records);
        let total: u64 = table.values().map(|c| c.iter().sum::<u64>()).sum();
        assert_eq!(total, records.len() as u64);
        for column in ["none", "default:median_blur"] {
            assert_eq!(table[column].iter().sum::<u64>(), 8);
        }
    }
}
