//! Nonparametric tests for scenario comparison: one-sided Wilcoxon
//! signed-rank (exact by sign-pattern enumeration for small samples, normal
//! approximation with tie and continuity corrections otherwise), the
//! Friedman rank test, and Bonferroni adjustment.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    /// First sample is stochastically greater.
    Greater,
    /// First sample is stochastically less.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Worse,
    Better,
    NotSignificant,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Worse => "worse",
            Direction::Better => "better",
            Direction::NotSignificant => "not-significant",
        }
    }
}

/// Result of one comparison. `adjusted_p` equals `min(1, p * m)`; the test
/// itself reports `m = 1` and the comparison driver re-adjusts for its
/// family size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonResult {
    /// Sum of positive ranks, W+.
    pub statistic: f64,
    pub p_value: f64,
    pub adjusted_p: f64,
    pub direction: Direction,
}

/// Largest sample size handled by exact enumeration.
pub const WILCOXON_EXACT_MAX_N: usize = 12;

/// Average ranks of `|values|` with ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j + 2) as f64 / 2.0; // ranks are 1-based
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// One-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped before ranking; if none remain the result is not significant
/// with p = 1.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], alternative: Alternative) -> Result<ComparisonResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "paired samples must have equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Ok(ComparisonResult {
            statistic: 0.0,
            p_value: 1.0,
            adjusted_p: 1.0,
            direction: Direction::NotSignificant,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let p = if diffs.len() <= WILCOXON_EXACT_MAX_N {
        wilcoxon_exact_p(&ranks, w_plus, alternative)
    } else {
        wilcoxon_normal_p(&ranks, w_plus, alternative)
    };
    Ok(ComparisonResult {
        statistic: w_plus,
        p_value: p,
        adjusted_p: p,
        direction: direction_for(p, alternative, 0.05),
    })
}

pub fn direction_for(adjusted_p: f64, alternative: Alternative, alpha: f64) -> Direction {
    if adjusted_p >= alpha {
        Direction::NotSignificant
    } else {
        match alternative {
            Alternative::Greater => Direction::Better,
            Alternative::Less => Direction::Worse,
        }
    }
}

/// Exact tail probability by enumerating all 2^n sign patterns over the
/// observed (possibly tied) ranks.
pub fn wilcoxon_exact_p(ranks: &[f64], w_plus: f64, alternative: Alternative) -> f64 {
    let n = ranks.len();
    assert!(n <= 20, "exact enumeration is exponential; n = {n}");
    let total = 1u64 << n;
    let mut extreme = 0u64;
    for pattern in 0..total {
        let w: f64 = (0..n).filter(|i| pattern >> i & 1 == 1).map(|i| ranks[i]).sum();
        let hit = match alternative {
            Alternative::Greater => w >= w_plus,
            Alternative::Less => w <= w_plus,
        };
        if hit {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

/// Normal approximation with tie correction and a 0.5 continuity correction.
pub fn wilcoxon_normal_p(ranks: &[f64], w_plus: f64, alternative: Alternative) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // tie correction subtracts sum(t^3 - t)/48 over tie groups
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if variance <= 0.0 {
        return 1.0;
    }
    let sd = variance.sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    match alternative {
        Alternative::Greater => 1.0 - normal.cdf((w_plus - mean - 0.5) / sd),
        Alternative::Less => normal.cdf((w_plus - mean + 0.5) / sd),
    }
}

/// Friedman rank test over a documents x algorithms matrix. Rows are ranked
/// with average ranks for ties; the statistic carries the standard tie
/// correction and the p-value comes from the chi-square upper tail with
/// k - 1 degrees of freedom. A fully tied matrix degenerates to (0, 1).
pub fn friedman_test(matrix: &[Vec<f64>]) -> Result<(f64, f64)> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::InvalidParameter("Friedman needs at least 2 documents".into()));
    }
    let k = matrix[0].len();
    if k < 2 {
        return Err(Error::InvalidParameter("Friedman needs at least 2 algorithms".into()));
    }
    if matrix.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidParameter("Friedman needs a rectangular matrix".into()));
    }
    let mut rank_sums = vec![0.0f64; k];
    let mut tie_term = 0.0f64; // sum over rows of sum(t^3 - t)
    for row in matrix {
        let ranks = average_ranks(row);
        for (sum, rank) in rank_sums.iter_mut().zip(&ranks) {
            *sum += rank;
        }
        let mut sorted = row.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut i = 0;
        while i < k {
            let mut j = i;
            while j + 1 < k && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    let nf = n as f64;
    let kf = k as f64;
    let ssbn: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (nf * kf * (kf + 1.0)) * ssbn - 3.0 * nf * (kf + 1.0);
    let correction = 1.0 - tie_term / (nf * kf * (kf * kf - 1.0));
    if correction <= 0.0 {
        return Ok((0.0, 1.0)); // every row fully tied
    }
    let statistic = raw / correction;
    let chi = ChiSquared::new(kf - 1.0).unwrap();
    let p = 1.0 - chi.cdf(statistic.max(0.0));
    Ok((statistic, p))
}

/// Bonferroni adjustment for a family of `m` tests.
pub fn bonferroni(p_values: &[f64], m: usize) -> Vec<f64> {
    p_values.iter().map(|p| (p * m as f64).min(1.0)).collect()
}
