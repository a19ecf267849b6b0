//! Hierarchical duplicate ranking and the alternative combiners.
//!
//! The hierarchical ranker splits the pending reports of a project into a
//! first class (screenshot similarity strictly above the threshold), ordered
//! by textual similarity, followed by a second class ordered by total
//! similarity. Ties are always broken by ingestion order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::ProjectFeatures;
use crate::similarity::{FeatureMask, ScoreMatrix, SimilarityScores};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CombinerKind {
    /// Screenshot filter first, then textual ordering.
    Hierarchical {
        thres: f64,
    },
    /// Sum of screenshot and textual similarity.
    AddCmb,
    /// Product of screenshot and textual similarity.
    MultiplyCmb,
    /// Textual filter first, then screenshot ordering.
    TextFirst {
        thres: f64,
    },
    OnlyText,
    OnlyImage,
}

impl CombinerKind {
    /// Parses a combiner name; `thres` is used by the thresholded variants.
    pub fn parse(name: &str, thres: f64) -> Result<Self> {
        let kind = match name.to_ascii_lowercase().as_str() {
            "setu" | "hierarchical" => Self::Hierarchical { thres },
            "addcmb" => Self::AddCmb,
            "multiplycmb" => Self::MultiplyCmb,
            "textfirst" => Self::TextFirst { thres },
            "onlytext" => Self::OnlyText,
            "onlyimage" => Self::OnlyImage,
            other => return Err(Error::Config(format!("unknown combiner `{other}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Hierarchical { .. } => "setu",
            Self::AddCmb => "addcmb",
            Self::MultiplyCmb => "multiplycmb",
            Self::TextFirst { .. } => "textfirst",
            Self::OnlyText => "onlytext",
            Self::OnlyImage => "onlyimage",
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        match self {
            Self::Hierarchical { thres } | Self::TextFirst { thres } => Some(*thres),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.threshold() {
            Some(t) if !(0.0..=1.0).contains(&t) => {
                Err(Error::Config(format!("threshold {t} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// Checks that the mask leaves every similarity group this combiner reads.
    pub fn check_mask(&self, mask: FeatureMask) -> Result<()> {
        let (needs_screenshot, needs_text) = match self {
            Self::OnlyText => (false, true),
            Self::OnlyImage => (true, false),
            _ => (true, true),
        };
        if needs_screenshot && !mask.screenshot_available() {
            return Err(Error::Config(format!(
                "{} needs a screenshot feature but mask `{mask}` disables both",
                self.name()
            )));
        }
        if needs_text && !mask.textual_available() {
            return Err(Error::Config(format!(
                "{} needs a textual feature but mask `{mask}` disables both",
                self.name()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.threshold() {
            Some(t) => write!(f, "{}({t})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    First,
    Second,
    Unclassed,
}

/// One ranked candidate, referring to the project's ingestion order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedCandidate {
    pub index: usize,
    pub class_tag: ClassTag,
    pub scores: SimilarityScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub report_id: String,
    pub class_tag: ClassTag,
    pub scores: SimilarityScores,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query_id: String,
    pub entries: Vec<RankedEntry>,
}

impl QueryResult {
    pub fn ranked_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.report_id.as_str())
    }
}

/// Ranks every other report of the project against `query`.
pub fn rank_duplicates(
    query: &str,
    features: &ProjectFeatures,
    combiner: CombinerKind,
    mask: FeatureMask,
) -> Result<QueryResult> {
    combiner.validate()?;
    combiner.check_mask(mask)?;
    let q = features
        .position(query)
        .ok_or_else(|| Error::UnknownReport(query.to_string()))?;
    let scores = features
        .bundles
        .iter()
        .map(|b| crate::similarity::score_pair(&features.bundles[q], b, mask))
        .collect::<Result<Vec<_>>>()?;
    let ranked = rank_candidates(q, &scores, combiner);
    Ok(QueryResult {
        query_id: query.to_string(),
        entries: ranked
            .into_iter()
            .enumerate()
            .map(|(pos, c)| RankedEntry {
                report_id: features.report_ids[c.index].clone(),
                class_tag: c.class_tag,
                scores: c.scores,
                rank: pos + 1,
            })
            .collect(),
    })
}

/// Ranks with precomputed pairwise scores.
pub fn rank_with_matrix(
    query: usize,
    matrix: &ScoreMatrix,
    combiner: CombinerKind,
) -> Vec<RankedCandidate> {
    let row: Vec<SimilarityScores> = (0..matrix.len()).map(|j| *matrix.get(query, j)).collect();
    rank_candidates(query, &row, combiner)
}

/// Core ranking over one row of scores: `scores[j]` is the similarity between
/// the query and report `j`. The query itself is excluded.
pub fn rank_candidates(
    query: usize,
    scores: &[SimilarityScores],
    combiner: CombinerKind,
) -> Vec<RankedCandidate> {
    let pending = (0..scores.len()).filter(|&j| j != query);
    let mut keyed: Vec<(u8, f64, RankedCandidate)> = pending
        .map(|j| {
            let s = scores[j];
            let (class, key) = match combiner {
                CombinerKind::Hierarchical { thres } if s.s_screenshot > thres => {
                    (ClassTag::First, s.s_textual)
                }
                CombinerKind::Hierarchical { .. } => (ClassTag::Second, s.s_total),
                CombinerKind::TextFirst { thres } if s.s_textual > thres => {
                    (ClassTag::First, s.s_screenshot)
                }
                CombinerKind::TextFirst { .. } => (ClassTag::Second, s.s_total),
                CombinerKind::AddCmb => (ClassTag::Unclassed, s.s_screenshot + s.s_textual),
                CombinerKind::MultiplyCmb => (ClassTag::Unclassed, s.s_screenshot * s.s_textual),
                CombinerKind::OnlyText => (ClassTag::Unclassed, s.s_textual),
                CombinerKind::OnlyImage => (ClassTag::Unclassed, s.s_screenshot),
            };
            let group = if class == ClassTag::Second { 1 } else { 0 };
            (
                group,
                key,
                RankedCandidate {
                    index: j,
                    class_tag: class,
                    scores: s,
                },
            )
        })
        .collect();
    keyed.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal))
            .then_with(|| a.2.index.cmp(&b.2.index))
    });
    keyed.into_iter().map(|(_, _, c)| c).collect()
}
