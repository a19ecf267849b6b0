//! Evaluation: ranking metrics, significance and effect size, threshold
//! tuning.

pub mod metrics;
pub mod stats;
pub mod tuning;

use std::fmt;
use std::str::FromStr;

pub use metrics::{
    average_precision, evaluate_project, evaluate_query, evaluate_with_matrix, improvement,
    method_label, recall_at_k, reciprocal_rank, Metric, MetricsReport, QueryEval,
};
pub use stats::{
    bonferroni, cliffs_delta, compare_samples, mann_whitney_exact, mann_whitney_normal,
    mann_whitney_one_tailed, Interpretation, MannWhitney, StatTestResult,
};
pub use tuning::{
    leave_one_out, map_curve, threshold_grid, tune_threshold, GridPoint, LabelOracle, LooFold,
    TuningProject, TuningResult,
};

use crate::error::{Error, Result};
use crate::ranker::CombinerKind;
use crate::similarity::FeatureMask;

/// A named evaluation configuration: combiner plus feature mask.
///
/// Names are a combiner (`setu`, `addcmb`, `multiplycmb`, `textfirst`,
/// `onlytext`, `onlyimage`), a bare ablation (`notf`, `noemb`, `noclr`,
/// `nostrc`, meaning the hierarchical ranker under that mask), or
/// `<combiner>-<mask>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Method {
    pub combiner: CombinerKind,
    pub mask: FeatureMask,
}

impl Method {
    pub fn parse(name: &str, thres: f64) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        if let Ok(mask) = lower.parse::<FeatureMask>() {
            if mask != FeatureMask::FULL {
                return Ok(Self {
                    combiner: CombinerKind::Hierarchical { thres },
                    mask,
                });
            }
        }
        let (combiner, mask) = match lower.split_once('-') {
            Some((c, m)) => (CombinerKind::parse(c, thres)?, m.parse::<FeatureMask>()?),
            None => (CombinerKind::parse(&lower, thres)?, FeatureMask::FULL),
        };
        combiner.check_mask(mask)?;
        Ok(Self { combiner, mask })
    }

    pub fn label(&self) -> String {
        method_label(self.combiner, self.mask)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 0.94)
    }
}
