//! Threshold tuning for the hierarchical ranker by grid search on mean MAP,
//! with a leave-one-out driver over projects.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::metrics::{average_precision, evaluate_with_matrix, method_label, MetricsReport};
use crate::corpus::GroundTruth;
use crate::error::{Error, Result};
use crate::pipeline::ProjectFeatures;
use crate::ranker::CombinerKind;
use crate::similarity::{FeatureMask, ScoreMatrix};

pub const DEFAULT_GRID_STEP: f64 = 0.01;

/// Thresholds `0, step, 2·step, …, 1`. The step must divide 1.
pub fn threshold_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step {step} outside (0, 1]"
        )));
    }
    let steps = (1.0 / step).round();
    if (steps * step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "grid step {step} does not divide 1"
        )));
    }
    let steps = steps as usize;
    Ok((0..=steps).map(|k| k as f64 / steps as f64).collect())
}

/// Supplies label-derived ground truth per project. Tuning reads labels only
/// through this trait.
pub trait LabelOracle {
    fn ground_truth(&self, project_id: &str) -> Result<GroundTruth>;
}

/// Label-free view of a project used during tuning: ids and pairwise scores.
#[derive(Debug, Clone)]
pub struct TuningProject {
    pub project_id: String,
    pub report_ids: Vec<String>,
    pub matrix: ScoreMatrix,
}

impl TuningProject {
    pub fn from_features(features: &ProjectFeatures, mask: FeatureMask) -> Result<Self> {
        Ok(Self {
            project_id: features.project_id.clone(),
            report_ids: features.report_ids.clone(),
            matrix: ScoreMatrix::compute(&features.bundles, mask)?,
        })
    }

    fn checked_truth(&self, labels: &dyn LabelOracle) -> Result<GroundTruth> {
        let gt = labels.ground_truth(&self.project_id)?;
        if gt.report_ids() != self.report_ids.as_slice() {
            return Err(Error::Validation(format!(
                "ground truth does not match the reports of project `{}`",
                self.project_id
            )));
        }
        Ok(gt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub thres: f64,
    pub mean_map: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub held_out: Option<String>,
    pub thres: f64,
    pub training_map: f64,
    pub grid: Vec<GridPoint>,
}

/// MAP of one project under the hierarchical ranker for each threshold.
///
/// Equivalent to ranking every query at every threshold, but each query's
/// candidates are sorted only once per class key: the first class keeps the
/// textual order and the second the total order, both with ingestion-order
/// tie-breaking, so filtering the two presorted lists reproduces the ranker.
pub fn map_curve(matrix: &ScoreMatrix, gt: &GroundTruth, grid: &[f64]) -> Result<Vec<f64>> {
    let queries = gt.eligible_queries();
    if queries.is_empty() {
        return Err(Error::NoEligibleQuery(String::new()));
    }
    let n = matrix.len();
    let mut sums = vec![0.0; grid.len()];
    let mut ranked = Vec::with_capacity(n);
    for &q in &queries {
        let truth: HashSet<usize> = gt.duplicates_at(q).iter().copied().collect();
        let mut by_text: Vec<usize> = (0..n).filter(|&j| j != q).collect();
        let mut by_total = by_text.clone();
        let row = |j: usize| matrix.get(q, j);
        by_text.sort_by(|&a, &b| {
            row(b)
                .s_textual
                .total_cmp(&row(a).s_textual)
                .then(a.cmp(&b))
        });
        by_total.sort_by(|&a, &b| row(b).s_total.total_cmp(&row(a).s_total).then(a.cmp(&b)));
        for (slot, &thres) in grid.iter().enumerate() {
            ranked.clear();
            ranked.extend(
                by_text
                    .iter()
                    .copied()
                    .filter(|&j| row(j).s_screenshot > thres),
            );
            ranked.extend(
                by_total
                    .iter()
                    .copied()
                    .filter(|&j| row(j).s_screenshot <= thres),
            );
            sums[slot] += average_precision(&ranked, &truth)?;
        }
    }
    Ok(sums.into_iter().map(|s| s / queries.len() as f64).collect())
}

/// Picks the threshold maximizing mean MAP over `training`; ties go to the
/// smallest threshold.
pub fn tune_threshold(
    training: &[&TuningProject],
    labels: &dyn LabelOracle,
    grid: &[f64],
) -> Result<TuningResult> {
    if training.is_empty() {
        return Err(Error::InvalidArgument(
            "threshold tuning needs at least one training project".into(),
        ));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty threshold grid".into()));
    }
    let mut totals = vec![0.0; grid.len()];
    for project in training {
        let gt = project.checked_truth(labels)?;
        let curve = map_curve(&project.matrix, &gt, grid).map_err(|e| match e {
            Error::NoEligibleQuery(_) => Error::NoEligibleQuery(project.project_id.clone()),
            other => other,
        })?;
        totals.iter_mut().zip(curve).for_each(|(t, m)| *t += m);
    }
    let points: Vec<GridPoint> = grid
        .iter()
        .zip(&totals)
        .map(|(&thres, &total)| GridPoint {
            thres,
            mean_map: total / training.len() as f64,
        })
        .collect();

    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        let better = p.mean_map > points[best].mean_map;
        let tie_lower = p.mean_map == points[best].mean_map && p.thres < points[best].thres;
        if better || tie_lower {
            best = i;
        }
    }
    Ok(TuningResult {
        held_out: None,
        thres: points[best].thres,
        training_map: points[best].mean_map,
        grid: points,
    })
}

/// One leave-one-out fold: tuning on every other project, then evaluation of
/// the held-out project at the tuned threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooFold {
    pub tuning: TuningResult,
    pub held_out_metrics: MetricsReport,
}

/// Runs the fold holding out `held_out`. The held-out project's labels are
/// requested only after tuning has finished.
pub fn leave_one_out(
    projects: &[TuningProject],
    labels: &dyn LabelOracle,
    grid: &[f64],
    held_out: &str,
) -> Result<LooFold> {
    let target = projects
        .iter()
        .find(|p| p.project_id == held_out)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown held-out project `{held_out}`")))?;
    let training: Vec<&TuningProject> = projects
        .iter()
        .filter(|p| p.project_id != held_out)
        .collect();
    let mut tuning = tune_threshold(&training, labels, grid)?;
    tuning.held_out = Some(held_out.to_string());

    let gt = target.checked_truth(labels)?;
    let combiner = CombinerKind::Hierarchical {
        thres: tuning.thres,
    };
    let held_out_metrics = evaluate_with_matrix(
        &target.project_id,
        &method_label(combiner, target.matrix.mask()),
        &target.matrix,
        &gt,
        combiner,
    )?;
    Ok(LooFold {
        tuning,
        held_out_metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ground_truth, test_report, Project};
    use crate::ranker::rank_with_matrix;
    use crate::similarity::SimilarityScores;
    use proptest::prelude::*;
    use std::collections::HashMap;

    struct Labels(HashMap<String, GroundTruth>);

    impl LabelOracle for Labels {
        fn ground_truth(&self, project_id: &str) -> Result<GroundTruth> {
            self.0
                .get(project_id)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(project_id.into()))
        }
    }

    fn scores(screenshot: f64, textual: f64) -> SimilarityScores {
        SimilarityScores {
            s_screenshot: screenshot,
            s_textual: textual,
            s_total: (screenshot + textual) / 2.0,
            ..Default::default()
        }
    }

    /// Symmetric matrix from an upper-triangle generator.
    fn matrix(n: usize, f: impl Fn(usize, usize) -> SimilarityScores) -> ScoreMatrix {
        let mut all = vec![scores(1.0, 1.0); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let s = f(i, j);
                all[i * n + j] = s;
                all[j * n + i] = s;
            }
        }
        ScoreMatrix::from_scores(n, FeatureMask::FULL, all).unwrap()
    }

    fn project(id: &str, labels: &[&str]) -> (Project, GroundTruth) {
        let reports = labels
            .iter()
            .enumerate()
            .map(|(i, l)| test_report(&format!("{id}-{i}"), id, l))
            .collect();
        let p = Project::new(id, reports).unwrap();
        let gt = ground_truth(&p);
        (p, gt)
    }

    #[test]
    fn grid_shape() {
        let g = threshold_grid(0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[94], 0.94);
        assert_eq!(g[100], 1.0);
        assert_eq!(
            threshold_grid(0.25).unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert!(threshold_grid(0.3).is_err());
        assert!(threshold_grid(0.0).is_err());
    }

    #[test]
    fn flat_curve_picks_zero() {
        let (p, gt) = project("A", &["x", "x"]);
        let tp = TuningProject {
            project_id: "A".into(),
            report_ids: p.reports.iter().map(|r| r.report_id.clone()).collect(),
            matrix: matrix(2, |_, _| scores(0.5, 0.5)),
        };
        let labels = Labels(HashMap::from([("A".to_string(), gt)]));
        let result = tune_threshold(&[&tp], &labels, &threshold_grid(0.01).unwrap()).unwrap();
        assert_eq!(result.thres, 0.0);
        assert_eq!(result.training_map, 1.0);
        assert!(result.grid.iter().all(|p| p.mean_map == 1.0));
    }

    #[test]
    fn planted_peak_is_recovered() {
        // report 0 and 1 are duplicates sharing a screenshot (0.97) with
        // moderate text; report 2 is a confusable with identical text and a
        // screenshot similarity of 0.895.
        let (p, gt) = project("A", &["x", "x", "UNIQUE"]);
        let m = matrix(3, |i, j| match (i, j) {
            (0, 1) => scores(0.97, 0.5),
            (0, 2) => scores(0.895, 1.0),
            _ => scores(0.3, 0.2),
        });
        let tp = TuningProject {
            project_id: "A".into(),
            report_ids: p.reports.iter().map(|r| r.report_id.clone()).collect(),
            matrix: m,
        };
        let labels = Labels(HashMap::from([("A".to_string(), gt)]));
        let result = tune_threshold(&[&tp], &labels, &threshold_grid(0.01).unwrap()).unwrap();
        assert_eq!(result.thres, 0.9);
        assert!(matches!(
            tune_threshold(&[], &labels, &[0.5]),
            Err(Error::InvalidArgument(_))
        ));
    }

    proptest! {
        #[test]
        fn map_curve_matches_ranker(
            labels in prop::collection::vec(0u8..4, 2..14),
            cells in prop::collection::vec((0u8..=10, 0u8..=10), 91),
        ) {
            let names: Vec<String> = labels.iter().map(|l| format!("L{l}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let (_, gt) = project("A", &refs);
            prop_assume!(!gt.eligible_queries().is_empty());
            let n = refs.len();
            let m = matrix(n, |i, j| {
                let (a, b) = cells[(i * 7 + j) % cells.len()];
                scores(a as f64 / 10.0, b as f64 / 10.0)
            });
            let grid = threshold_grid(0.05).unwrap();
            let curve = map_curve(&m, &gt, &grid).unwrap();
            for (slot, &thres) in grid.iter().enumerate() {
                let mut total = 0.0;
                let queries = gt.eligible_queries();
                for &q in &queries {
                    let ranked: Vec<usize> = rank_with_matrix(q, &m, CombinerKind::Hierarchical { thres }).iter().map(|c| c.index).collect();
                    let truth: HashSet<usize> = gt.duplicates_at(q).iter().copied().collect();
                    total += average_precision(&ranked, &truth).unwrap();
                }
                prop_assert!((curve[slot] - total / queries.len() as f64).abs() < 1e-12);
            }
        }
    }
}
