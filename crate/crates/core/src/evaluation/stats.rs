//! One-tailed Mann-Whitney U test, Bonferroni adjustment and Cliff's delta.
//!
//! The U test checks whether the second sample is stochastically smaller
//! than the first. Small samples (combined size up to
//! [`EXACT_LIMIT`]) get the exact null distribution; larger ones use the
//! normal approximation with tie and continuity corrections.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest combined sample size tested with the exact distribution.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U of the first sample: pairs where x > y, plus half the ties.
    pub u: f64,
    pub p_value: f64,
    pub exact: bool,
}

fn check_samples(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidArgument(
            "both samples must be non-empty".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("samples contain NaN".into()));
    }
    Ok(())
}

/// One-tailed test of H1: `ys` is stochastically smaller than `xs`.
pub fn mann_whitney_one_tailed(xs: &[f64], ys: &[f64]) -> Result<MannWhitney> {
    if xs.len() + ys.len() <= EXACT_LIMIT {
        mann_whitney_exact(xs, ys)
    } else {
        mann_whitney_normal(xs, ys)
    }
}

/// Pooled values with doubled mid-ranks (so tied ranks stay integral), and
/// the tie-group sizes.
fn doubled_midranks(xs: &[f64], ys: &[f64]) -> (Vec<u64>, Vec<u64>, Vec<usize>) {
    let mut pooled: Vec<(f64, bool)> = xs
        .iter()
        .map(|&v| (v, true))
        .chain(ys.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut x_ranks = Vec::with_capacity(xs.len());
    let mut all_ranks = Vec::with_capacity(pooled.len());
    let mut ties = Vec::new();
    let mut start = 0;
    while start < pooled.len() {
        let mut end = start;
        while end + 1 < pooled.len() && pooled[end + 1].0 == pooled[start].0 {
            end += 1;
        }
        // ranks start+1 ..= end+1, doubled midrank = (start+1) + (end+1)
        let doubled = (start + end + 2) as u64;
        for item in &pooled[start..=end] {
            all_ranks.push(doubled);
            if item.1 {
                x_ranks.push(doubled);
            }
        }
        ties.push(end - start + 1);
        start = end + 1;
    }
    (all_ranks, x_ranks, ties)
}

/// Exact p-value from the permutation distribution of the rank sum.
pub fn mann_whitney_exact(xs: &[f64], ys: &[f64]) -> Result<MannWhitney> {
    check_samples(xs, ys)?;
    let nx = xs.len();
    let (all_ranks, x_ranks, _) = doubled_midranks(xs, ys);
    let observed: u64 = x_ranks.iter().sum();
    let max_sum: u64 = all_ranks.iter().sum::<u64>() + 1;

    // ways[k][s]: subsets of size k whose doubled rank sum is s
    let mut ways = vec![vec![0u128; max_sum as usize]; nx + 1];
    ways[0][0] = 1;
    for &r in &all_ranks {
        for k in (1..=nx).rev() {
            let (lower, upper) = ways.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for s in (r as usize..max_sum as usize).rev() {
                cur[s] += prev[s - r as usize];
            }
        }
    }
    let total: u128 = ways[nx].iter().sum();
    let at_least: u128 = ways[nx][observed as usize..].iter().sum();

    let doubled_u = observed as f64 - (nx * (nx + 1)) as f64;
    Ok(MannWhitney {
        u: doubled_u / 2.0,
        p_value: at_least as f64 / total as f64,
        exact: true,
    })
}

/// Normal approximation with tie-corrected variance and a continuity
/// correction of 0.5.
pub fn mann_whitney_normal(xs: &[f64], ys: &[f64]) -> Result<MannWhitney> {
    check_samples(xs, ys)?;
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let n = nx + ny;
    let (_, x_ranks, ties) = doubled_midranks(xs, ys);
    let rank_sum = x_ranks.iter().sum::<u64>() as f64 / 2.0;
    let u = rank_sum - nx * (nx + 1.0) / 2.0;

    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let variance = nx * ny / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let mean = nx * ny / 2.0;
    let p_value = if variance <= 0.0 {
        1.0
    } else {
        let z = (u - mean - 0.5) / variance.sqrt();
        (0.5 * erfc(z / std::f64::consts::SQRT_2)).clamp(f64::MIN_POSITIVE, 1.0)
    };
    Ok(MannWhitney {
        u,
        p_value,
        exact: false,
    })
}

/// Bonferroni adjustment for `m` tests: `min(1, p * m)`.
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < p_values.len() {
        return Err(Error::InvalidArgument(format!(
            "test count {m} is smaller than the number of p-values {}",
            p_values.len()
        )));
    }
    Ok(p_values.iter().map(|p| (p * m as f64).min(1.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpretation {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Interpretation {
    pub const SMALL_AT: f64 = 0.147;
    pub const MEDIUM_AT: f64 = 0.33;
    pub const LARGE_AT: f64 = 0.474;

    /// Bands applied to |delta|.
    pub fn from_delta(delta: f64) -> Self {
        let magnitude = delta.abs();
        if magnitude < Self::SMALL_AT {
            Self::Negligible
        } else if magnitude < Self::MEDIUM_AT {
            Self::Small
        } else if magnitude < Self::LARGE_AT {
            Self::Medium
        } else {
            Self::Large
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Negligible => "negligible",
            Self::Small => "small",
            Self::Medium => "medium",
            Self::Large => "large",
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cliff's delta of `xs` over `ys`, in [-1, 1].
pub fn cliffs_delta(xs: &[f64], ys: &[f64]) -> Result<(f64, Interpretation)> {
    check_samples(xs, ys)?;
    // count y values below and equal to each x via a sorted copy of ys
    let mut sorted = ys.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut dominance: i64 = 0;
    for &x in xs {
        let below = sorted.partition_point(|&y| y < x);
        let not_above = sorted.partition_point(|&y| y <= x);
        let above = sorted.len() - not_above;
        dominance += below as i64 - above as i64;
    }
    let delta = dominance as f64 / (xs.len() * ys.len()) as f64;
    Ok((delta, Interpretation::from_delta(delta)))
}

/// Full comparison of two methods on one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub u_statistic: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub cliffs_delta: f64,
    pub interpretation: Interpretation,
}

/// Runs the U test and Cliff's delta, adjusting the p-value for `m` tests.
pub fn compare_samples(xs: &[f64], ys: &[f64], m: usize) -> Result<StatTestResult> {
    let test = mann_whitney_one_tailed(xs, ys)?;
    let (delta, interpretation) = cliffs_delta(xs, ys)?;
    let p_adjusted = bonferroni(&[test.p_value], m.max(1))?[0];
    Ok(StatTestResult {
        u_statistic: test.u,
        p_value: test.p_value,
        p_adjusted,
        cliffs_delta: delta,
        interpretation,
    })
}
