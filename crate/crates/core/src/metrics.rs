//! OCR quality measures: character- and word-level edit distance rates,
//! bag-of-words measures, precision/recall/F1, and the edit-operation error
//! taxonomy.
//!
//! Texts are compared as sequences of Unicode scalar values after composed
//! (NFC) normalization, so Portuguese diacritics count once on both sides.
//! Tokenization splits on Unicode whitespace runs, is case-sensitive, and
//! keeps punctuation attached to tokens.

use std::collections::HashMap;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

fn nfc(s: &str) -> Vec<char> {
    s.nfc().collect()
}

fn tokens(s: &str) -> Vec<String> {
    s.nfc().collect::<String>().split_whitespace().map(str::to_owned).collect()
}

/// Operation counts of one optimal edit script, with
/// `distance == insertions + deletions + substitutions`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EditScript {
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub distance: usize,
}

/// Unit-cost Levenshtein distance between `a` and `b`, counting operations
/// that turn `a` into `b`: deletions remove characters of `a`, insertions
/// add characters of `b`. Backtrace ties resolve substitution over deletion
/// over insertion so counts are deterministic.
pub fn levenshtein(a: &str, b: &str) -> EditScript {
    let a = nfc(a);
    let b = nfc(b);
    levenshtein_seq(&a, &b)
}

fn levenshtein_seq<T: PartialEq>(a: &[T], b: &[T]) -> EditScript {
    let (m, n) = (a.len(), b.len());
    let width = n + 1;
    let mut d = vec![0usize; (m + 1) * width];
    for j in 0..=n {
        d[j] = j;
    }
    for i in 1..=m {
        d[i * width] = i;
        for j in 1..=n {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let best = (d[(i - 1) * width + j - 1] + cost)
                .min(d[(i - 1) * width + j] + 1)
                .min(d[i * width + j - 1] + 1);
            d[i * width + j] = best;
        }
    }

    let mut script = EditScript { insertions: 0, deletions: 0, substitutions: 0, distance: d[m * width + n] };
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            if here == d[(i - 1) * width + j - 1] + cost {
                if cost == 1 {
                    script.substitutions += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * width + j] + 1 {
            script.deletions += 1;
            i -= 1;
            continue;
        }
        script.insertions += 1;
        j -= 1;
    }
    debug_assert_eq!(
        script.distance,
        script.insertions + script.deletions + script.substitutions
    );
    script
}

fn count_occurrences(words: &[String]) -> HashMap<&str, usize> {
    let mut counts = HashMap::new();
    for w in words {
        *counts.entry(w.as_str()).or_insert(0) += 1;
    }
    counts
}

/// Number of distinct ground-truth words whose occurrence counts match
/// exactly in the OCR output.
pub fn bow_count_matches(gt: &str, out: &str) -> usize {
    let gt_tokens = tokens(gt);
    let out_tokens = tokens(out);
    let gt_counts = count_occurrences(&gt_tokens);
    let out_counts = count_occurrences(&out_tokens);
    gt_counts
        .iter()
        .filter(|(word, n)| out_counts.get(**word) == Some(n))
        .count()
}

/// Character error rate: edit distance over the ground-truth character count.
pub fn cer(gt: &str, out: &str) -> Result<f64> {
    let gt_len = nfc(gt).len();
    if gt_len == 0 {
        return Err(Error::UndefinedMetric("CER needs a non-empty ground truth".into()));
    }
    Ok(levenshtein(gt, out).distance as f64 / gt_len as f64)
}

/// `(1 - CER) * 100`; unclamped, so it goes negative when CER exceeds 1.
pub fn character_accuracy(gt: &str, out: &str) -> Result<f64> {
    Ok((1.0 - cer(gt, out)?) * 100.0)
}

/// Word error rate: word-level edit distance over the ground-truth token count.
pub fn wer(gt: &str, out: &str) -> Result<f64> {
    let gt_tokens = tokens(gt);
    if gt_tokens.is_empty() {
        return Err(Error::UndefinedMetric("WER needs at least one ground-truth token".into()));
    }
    let out_tokens = tokens(out);
    Ok(levenshtein_seq(&gt_tokens, &out_tokens).distance as f64 / gt_tokens.len() as f64)
}

/// Fraction of distinct ground-truth words recognized at least once.
pub fn index_bow(gt: &str, out: &str) -> Result<f64> {
    let gt_tokens = tokens(gt);
    if gt_tokens.is_empty() {
        return Err(Error::UndefinedMetric("index BoW needs at least one ground-truth token".into()));
    }
    let out_tokens = tokens(out);
    let out_counts = count_occurrences(&out_tokens);
    let gt_counts = count_occurrences(&gt_tokens);
    let found = gt_counts.keys().filter(|w| out_counts.contains_key(*w)).count();
    Ok(found as f64 / gt_counts.len() as f64)
}

/// Count-matched-words precision against the output token count, recall
/// against the ground-truth token count, and their harmonic mean. Empty
/// sides contribute zero instead of dividing by zero.
pub fn precision_recall_f1(gt: &str, out: &str) -> (f64, f64, f64) {
    let matches = bow_count_matches(gt, out) as f64;
    let out_len = tokens(out).len() as f64;
    let gt_len = tokens(gt).len() as f64;
    let precision = if out_len > 0.0 { matches / out_len } else { 0.0 };
    let recall = if gt_len > 0.0 { matches / gt_len } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Which edit-operation kinds appear in the optimal script for a document,
/// in the fixed reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorCategory {
    None,
    Del,
    Ins,
    Sub,
    DelIns,
    DelSub,
    InsSub,
    DelInsSub,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 8] = [
        ErrorCategory::None,
        ErrorCategory::Del,
        ErrorCategory::Ins,
        ErrorCategory::Sub,
        ErrorCategory::DelIns,
        ErrorCategory::DelSub,
        ErrorCategory::InsSub,
        ErrorCategory::DelInsSub,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ErrorCategory::None => "none",
            ErrorCategory::Del => "del",
            ErrorCategory::Ins => "ins",
            ErrorCategory::Sub => "sub",
            ErrorCategory::DelIns => "del+ins",
            ErrorCategory::DelSub => "del+sub",
            ErrorCategory::InsSub => "ins+sub",
            ErrorCategory::DelInsSub => "del+ins+sub",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::NotFound(format!("unknown error category `{s}`")))
    }

    pub fn from_script(script: &EditScript) -> Self {
        match (script.deletions > 0, script.insertions > 0, script.substitutions > 0) {
            (false, false, false) => ErrorCategory::None,
            (true, false, false) => ErrorCategory::Del,
            (false, true, false) => ErrorCategory::Ins,
            (false, false, true) => ErrorCategory::Sub,
            (true, true, false) => ErrorCategory::DelIns,
            (true, false, true) => ErrorCategory::DelSub,
            (false, true, true) => ErrorCategory::InsSub,
            (true, true, true) => ErrorCategory::DelInsSub,
        }
    }
}

/// Classifies a document by the set of edit-operation kinds present.
pub fn classify_errors(gt: &str, out: &str) -> ErrorCategory {
    ErrorCategory::from_script(&levenshtein(gt, out))
}

/// Per-document, per-scenario measurement bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub cer: f64,
    pub character_accuracy: f64,
    pub wer: f64,
    pub bow_count_matches: usize,
    pub index_bow: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Computes the full measurement bundle for one (ground truth, output) pair.
pub fn compute_record(gt: &str, out: &str) -> Result<MetricRecord> {
    let cer = cer(gt, out)?;
    let (precision, recall, f1) = precision_recall_f1(gt, out);
    Ok(MetricRecord {
        cer,
        character_accuracy: (1.0 - cer) * 100.0,
        wer: wer(gt, out)?,
        bow_count_matches: bow_count_matches(gt, out),
        index_bow: index_bow(gt, out)?,
        precision,
        recall,
        f1,
    })
}
