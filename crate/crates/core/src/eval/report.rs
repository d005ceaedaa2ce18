//! Comparison driver and CSV report rendering.
//!
//! Column labels are `(scenario, operator)` pairs; documents present in
//! every column form the paired sample. Per metric, the driver runs a
//! Friedman test across columns plus both one-sided Wilcoxon tests per
//! ordered column pair, Bonferroni-adjusted with the family size equal to
//! the number of ordered pairs in that table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::ErrorCategory;

use super::stats::{
    self, bonferroni, friedman_test, wilcoxon_signed_rank, Alternative, ComparisonResult,
};
use super::{error_frequency_table, EvalRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    CharacterAccuracy,
    F1,
}

impl MetricKind {
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::CharacterAccuracy => "character_accuracy",
            MetricKind::F1 => "f1",
        }
    }

    fn value(self, record: &EvalRecord) -> f64 {
        match self {
            MetricKind::CharacterAccuracy => record.metrics.character_accuracy,
            MetricKind::F1 => record.metrics.f1,
        }
    }
}

/// Both one-sided tests for an ordered column pair `(a, b)`.
#[derive(Debug, Clone)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    pub n: usize,
    pub greater: ComparisonResult,
    pub less: ComparisonResult,
}

impl PairComparison {
    /// Matrix cell marker for row `a` against column `b`: `>` repeated per
    /// significance tier when better, `<` when worse, empty otherwise.
    pub fn marker(&self) -> &'static str {
        let tier = |p: f64| {
            if p < 0.001 {
                3
            } else if p < 0.01 {
                2
            } else if p < 0.05 {
                1
            } else {
                0
            }
        };
        match (tier(self.greater.adjusted_p), tier(self.less.adjusted_p)) {
            (3, _) => ">>>",
            (2, _) => ">>",
            (1, _) => ">",
            (_, 3) => "<<<",
            (_, 2) => "<<",
            (_, 1) => "<",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub metric: MetricKind,
    pub labels: Vec<String>,
    /// Documents shared by every column (the paired sample).
    pub doc_ids: Vec<String>,
    pub means: Vec<f64>,
    /// `None` when fewer than two columns or two shared documents exist.
    pub friedman: Option<(f64, f64)>,
    pub pairs: Vec<PairComparison>,
    /// Bonferroni family size: the number of ordered pairs tested.
    pub family_size: usize,
}

/// Deterministic column order: `none` first, then lexicographic.
fn column_order(records: &[EvalRecord]) -> Vec<String> {
    let mut labels: Vec<String> = records
        .iter()
        .map(EvalRecord::column)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    labels.sort_by_key(|l| (l != "none", l.clone()));
    labels
}

/// Builds the per-metric comparison table from evaluation records.
pub fn compare_records(records: &[EvalRecord], metric: MetricKind) -> Result<ComparisonTable> {
    let labels = column_order(records);
    // column -> doc -> value; duplicates (same doc+column) are rejected
    let mut columns: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    let mut col_of: Vec<String> = Vec::with_capacity(records.len());
    for record in records {
        col_of.push(record.column());
    }
    for (record, column) in records.iter().zip(&col_of) {
        let entry = columns.entry(column).or_default();
        if entry.insert(&record.doc_id, metric.value(record)).is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate record for document `{}` in column `{column}`",
                record.doc_id
            )));
        }
    }

    let means: Vec<f64> = labels
        .iter()
        .map(|label| {
            let col = &columns[label.as_str()];
            col.values().sum::<f64>() / col.len().max(1) as f64
        })
        .collect();

    // paired sample: documents present in every column
    let mut doc_ids: Vec<String> = match labels.first() {
        Some(first) => columns[first.as_str()].keys().map(|s| s.to_string()).collect(),
        None => Vec::new(),
    };
    doc_ids.retain(|doc| labels.iter().all(|l| columns[l.as_str()].contains_key(doc.as_str())));

    let friedman = if labels.len() >= 2 && doc_ids.len() >= 2 {
        let matrix: Vec<Vec<f64>> = doc_ids
            .iter()
            .map(|doc| labels.iter().map(|l| columns[l.as_str()][doc.as_str()]).collect())
            .collect();
        Some(friedman_test(&matrix)?)
    } else {
        None
    };

    let family_size = labels.len() * labels.len().saturating_sub(1);
    let mut pairs = Vec::new();
    if !doc_ids.is_empty() {
        for a in &labels {
            for b in &labels {
                if a == b {
                    continue;
                }
                let x: Vec<f64> =
                    doc_ids.iter().map(|d| columns[a.as_str()][d.as_str()]).collect();
                let y: Vec<f64> =
                    doc_ids.iter().map(|d| columns[b.as_str()][d.as_str()]).collect();
                let mut greater = wilcoxon_signed_rank(&x, &y, Alternative::Greater)?;
                let mut less = wilcoxon_signed_rank(&x, &y, Alternative::Less)?;
                greater.adjusted_p = bonferroni(&[greater.p_value], family_size)[0];
                less.adjusted_p = bonferroni(&[less.p_value], family_size)[0];
                greater.direction =
                    stats::direction_for(greater.adjusted_p, Alternative::Greater, 0.05);
                less.direction = stats::direction_for(less.adjusted_p, Alternative::Less, 0.05);
                pairs.push(PairComparison {
                    a: a.clone(),
                    b: b.clone(),
                    n: doc_ids.len(),
                    greater,
                    less,
                });
            }
        }
    }
    Ok(ComparisonTable { metric, labels, doc_ids, means, friedman, pairs, family_size })
}

/// Files written by `render_reports`.
#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub means: PathBuf,
    pub significance: Vec<PathBuf>,
    pub comparisons: PathBuf,
    pub error_frequency: PathBuf,
    pub metadata: PathBuf,
}

/// Renders the full report set: per-column mean tables, one significance
/// matrix per metric with the `<`/`>` tier markers, the raw pairwise test
/// table, the error-frequency table, and a metadata note recording the
/// Bonferroni family convention. Row order is deterministic.
pub fn render_reports(
    records: &[EvalRecord],
    tables: &[ComparisonTable],
    out_dir: &Path,
) -> Result<ReportPaths> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let io = |path: &Path, e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::MalformedInput(format!("{}: {other:?}", path.display())),
    };

    // per-column means over all records (not only the paired sample)
    let means_path = out_dir.join("means.csv");
    {
        let mut w = csv::Writer::from_path(&means_path).map_err(|e| io(&means_path, e))?;
        w.write_record(["column", "documents", "mean_character_accuracy", "mean_f1"])
            .map_err(|e| io(&means_path, e))?;
        let mut acc: BTreeMap<String, (usize, f64, f64)> = BTreeMap::new();
        for r in records {
            let entry = acc.entry(r.column()).or_insert((0, 0.0, 0.0));
            entry.0 += 1;
            entry.1 += r.metrics.character_accuracy;
            entry.2 += r.metrics.f1;
        }
        let mut labels: Vec<&String> = acc.keys().collect();
        labels.sort_by_key(|l| (l.as_str() != "none", l.to_string()));
        for label in labels {
            let (n, ca, f1) = acc[label];
            w.write_record([
                label.as_str(),
                &n.to_string(),
                &format!("{:.4}", ca / n as f64),
                &format!("{:.4}", f1 / n as f64),
            ])
            .map_err(|e| io(&means_path, e))?;
        }
        w.flush().map_err(|e| Error::io(&means_path, e))?;
    }

    let mut significance = Vec::new();
    for table in tables {
        let path = out_dir.join(format!("significance_{}.csv", table.metric.label()));
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, e))?;
        let mut header = vec!["column".to_string()];
        header.extend(table.labels.iter().cloned());
        w.write_record(&header).map_err(|e| io(&path, e))?;
        let marker_of: BTreeMap<(&str, &str), &'static str> = table
            .pairs
            .iter()
            .map(|p| ((p.a.as_str(), p.b.as_str()), p.marker()))
            .collect();
        for a in &table.labels {
            let mut row = vec![a.clone()];
            for b in &table.labels {
                if a == b {
                    row.push(String::new());
                } else {
                    row.push(
                        marker_of.get(&(a.as_str(), b.as_str())).copied().unwrap_or("").to_string(),
                    );
                }
            }
            w.write_record(&row).map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        significance.push(path);
    }

    let comparisons_path = out_dir.join("comparisons.csv");
    {
        let mut w =
            csv::Writer::from_path(&comparisons_path).map_err(|e| io(&comparisons_path, e))?;
        w.write_record([
            "metric",
            "kind",
            "a",
            "b",
            "n",
            "statistic",
            "p_value",
            "adjusted_p",
            "direction",
        ])
        .map_err(|e| io(&comparisons_path, e))?;
        for table in tables {
            if let Some((chi2, p)) = table.friedman {
                w.write_record([
                    table.metric.label(),
                    "friedman",
                    "",
                    "",
                    &table.doc_ids.len().to_string(),
                    &format!("{chi2:.6}"),
                    &format!("{p:.6e}"),
                    "",
                    "",
                ])
                .map_err(|e| io(&comparisons_path, e))?;
            }
            for pair in &table.pairs {
                for (kind, result) in
                    [("wilcoxon_greater", &pair.greater), ("wilcoxon_less", &pair.less)]
                {
                    w.write_record([
                        table.metric.label(),
                        kind,
                        &pair.a,
                        &pair.b,
                        &pair.n.to_string(),
                        &format!("{:.2}", result.statistic),
                        &format!("{:.6e}", result.p_value),
                        &format!("{:.6e}", result.adjusted_p),
                        result.direction.label(),
                    ])
                    .map_err(|e| io(&comparisons_path, e))?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(&comparisons_path, e))?;
    }

    let errors_path = out_dir.join("error_frequency.csv");
    {
        let mut w = csv::Writer::from_path(&errors_path).map_err(|e| io(&errors_path, e))?;
        let mut header = vec!["column".to_string()];
        header.extend(ErrorCategory::ALL.iter().map(|c| c.label().to_string()));
        w.write_record(&header).map_err(|e| io(&errors_path, e))?;
        for (column, counts) in error_frequency_table(records) {
            let mut row = vec![column];
            row.extend(counts.iter().map(u64::to_string));
            w.write_record(&row).map_err(|e| io(&errors_path, e))?;
        }
        w.flush().map_err(|e| Error::io(&errors_path, e))?;
    }

    let metadata_path = out_dir.join("metadata.txt");
    let family_note = tables
        .iter()
        .map(|t| format!("{}: m = {} ordered pairs", t.metric.label(), t.family_size))
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(
        &metadata_path,
        format!(
            "significance tiers: p < 0.05 (*), p < 0.01 (**), p < 0.001 (***)\n\
             bonferroni family: per metric table\n{family_note}\n"
        ),
    )
    .map_err(|e| Error::io(&metadata_path, e))?;

    Ok(ReportPaths {
        means: means_path,
        significance,
        comparisons: comparisons_path,
        error_frequency: errors_path,
        metadata: metadata_path,
    })
}
