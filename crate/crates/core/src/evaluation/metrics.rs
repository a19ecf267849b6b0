//! Per-query ranking metrics and their per-project aggregation.

use std::collections::HashSet;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::corpus::GroundTruth;
use crate::error::{Error, Result};
use crate::pipeline::ProjectFeatures;
use crate::ranker::{rank_with_matrix, CombinerKind};
use crate::similarity::{FeatureMask, ScoreMatrix};

pub const RECALL_CUTOFFS: [usize; 3] = [1, 5, 10];

fn check_gt<T>(gt: &HashSet<T>) -> Result<()> {
    if gt.is_empty() {
        Err(Error::EmptyGroundTruth)
    } else {
        Ok(())
    }
}

/// 1 when at least one ground-truth duplicate is among the top `k`.
pub fn recall_at_k<T: Eq + Hash>(ranked: &[T], gt: &HashSet<T>, k: usize) -> Result<f64> {
    check_gt(gt)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(if ranked.iter().take(k).any(|r| gt.contains(r)) {
        1.0
    } else {
        0.0
    })
}

/// Mean over ground-truth members of the precision at the rank where each
/// is retrieved; members never retrieved contribute 0.
pub fn average_precision<T: Eq + Hash>(ranked: &[T], gt: &HashSet<T>) -> Result<f64> {
    check_gt(gt)?;
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (pos, item) in ranked.iter().enumerate() {
        if gt.contains(item) {
            hits += 1;
            sum += hits as f64 / (pos + 1) as f64;
        }
    }
    Ok(sum / gt.len() as f64)
}

/// Inverse rank of the first ground-truth member, 0 if none is ranked.
pub fn reciprocal_rank<T: Eq + Hash>(ranked: &[T], gt: &HashSet<T>) -> Result<f64> {
    check_gt(gt)?;
    Ok(ranked
        .iter()
        .position(|r| gt.contains(r))
        .map_or(0.0, |pos| 1.0 / (pos + 1) as f64))
}

/// Relative improvement of `ours` over `baseline`.
pub fn improvement(ours: f64, baseline: f64) -> Result<f64> {
    if baseline <= 0.0 || baseline.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "baseline must be positive, got {baseline}"
        )));
    }
    Ok((ours - baseline) / baseline)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEval {
    pub query_id: String,
    #[serde(rename = "recall@1")]
    pub recall_at_1: f64,
    #[serde(rename = "recall@5")]
    pub recall_at_5: f64,
    #[serde(rename = "recall@10")]
    pub recall_at_10: f64,
    pub ap: f64,
    pub rr: f64,
}

impl QueryEval {
    pub fn compute<T: Eq + Hash>(
        query_id: impl Into<String>,
        ranked: &[T],
        gt: &HashSet<T>,
    ) -> Result<Self> {
        Ok(Self {
            query_id: query_id.into(),
            recall_at_1: recall_at_k(ranked, gt, 1)?,
            recall_at_5: recall_at_k(ranked, gt, 5)?,
            recall_at_10: recall_at_k(ranked, gt, 10)?,
            ap: average_precision(ranked, gt)?,
            rr: reciprocal_rank(ranked, gt)?,
        })
    }

    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::RecallAt1 => self.recall_at_1,
            Metric::RecallAt5 => self.recall_at_5,
            Metric::RecallAt10 => self.recall_at_10,
            Metric::Map => self.ap,
            Metric::Mrr => self.rr,
        }
    }
}

/// The five reported metrics. Per query, MAP and MRR are AP and RR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "recall@1")]
    RecallAt1,
    #[serde(rename = "recall@5")]
    RecallAt5,
    #[serde(rename = "recall@10")]
    RecallAt10,
    #[serde(rename = "MAP")]
    Map,
    #[serde(rename = "MRR")]
    Mrr,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::RecallAt1,
        Metric::RecallAt5,
        Metric::RecallAt10,
        Metric::Map,
        Metric::Mrr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::RecallAt1 => "recall@1",
            Metric::RecallAt5 => "recall@5",
            Metric::RecallAt10 => "recall@10",
            Metric::Map => "MAP",
            Metric::Mrr => "MRR",
        }
    }
}

/// Metrics of one method on one project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub project_id: String,
    pub method: String,
    #[serde(rename = "recall@1")]
    pub recall_at_1: f64,
    #[serde(rename = "recall@5")]
    pub recall_at_5: f64,
    #[serde(rename = "recall@10")]
    pub recall_at_10: f64,
    #[serde(rename = "MAP")]
    pub map: f64,
    #[serde(rename = "MRR")]
    pub mrr: f64,
    pub queries: Vec<QueryEval>,
}

impl MetricsReport {
    /// Aggregates per-query values with unweighted means.
    pub fn from_queries(
        project_id: impl Into<String>,
        method: impl Into<String>,
        queries: Vec<QueryEval>,
    ) -> Result<Self> {
        let project_id = project_id.into();
        if queries.is_empty() {
            return Err(Error::NoEligibleQuery(project_id));
        }
        let mean =
            |f: fn(&QueryEval) -> f64| queries.iter().map(f).sum::<f64>() / queries.len() as f64;
        Ok(Self {
            recall_at_1: mean(|q| q.recall_at_1),
            recall_at_5: mean(|q| q.recall_at_5),
            recall_at_10: mean(|q| q.recall_at_10),
            map: mean(|q| q.ap),
            mrr: mean(|q| q.rr),
            project_id,
            method: method.into(),
            queries,
        })
    }

    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::RecallAt1 => self.recall_at_1,
            Metric::RecallAt5 => self.recall_at_5,
            Metric::RecallAt10 => self.recall_at_10,
            Metric::Map => self.map,
            Metric::Mrr => self.mrr,
        }
    }
}

/// Evaluates one query against precomputed scores.
pub fn evaluate_query(
    query: usize,
    matrix: &ScoreMatrix,
    gt: &GroundTruth,
    combiner: CombinerKind,
) -> Result<QueryEval> {
    let ranked: Vec<usize> = rank_with_matrix(query, matrix, combiner)
        .iter()
        .map(|c| c.index)
        .collect();
    let truth: HashSet<usize> = gt.duplicates_at(query).iter().copied().collect();
    QueryEval::compute(gt.report_ids()[query].clone(), &ranked, &truth)
}

/// Evaluates every eligible query (reports with at least one duplicate) of a
/// project, given its pairwise scores.
pub fn evaluate_with_matrix(
    project_id: &str,
    method: &str,
    matrix: &ScoreMatrix,
    gt: &GroundTruth,
    combiner: CombinerKind,
) -> Result<MetricsReport> {
    combiner.validate()?;
    combiner.check_mask(matrix.mask())?;
    if gt.len() != matrix.len() {
        return Err(Error::DimensionMismatch {
            left: gt.len(),
            right: matrix.len(),
        });
    }
    let queries = gt
        .eligible_queries()
        .into_iter()
        .map(|q| evaluate_query(q, matrix, gt, combiner))
        .collect::<Result<Vec<_>>>()?;
    MetricsReport::from_queries(project_id, method, queries)
}

/// Ranks every eligible query of the project and aggregates the metrics.
pub fn evaluate_project(
    features: &ProjectFeatures,
    gt: &GroundTruth,
    combiner: CombinerKind,
    mask: FeatureMask,
) -> Result<MetricsReport> {
    if gt.report_ids() != features.report_ids.as_slice() {
        return Err(Error::Validation(format!(
            "ground truth does not match the reports of project `{}`",
            features.project_id
        )));
    }
    combiner.check_mask(mask)?;
    let matrix = ScoreMatrix::compute(&features.bundles, mask)?;
    evaluate_with_matrix(
        &features.project_id,
        &method_label(combiner, mask),
        &matrix,
        gt,
        combiner,
    )
}

/// Conventional method label: combiner name, with the mask appended when
/// it is not the full mask.
pub fn method_label(combiner: CombinerKind, mask: FeatureMask) -> String {
    if mask == FeatureMask::FULL {
        combiner.name().to_string()
    } else {
        format!("{}-{}", combiner.name(), mask.name())
    }
}
