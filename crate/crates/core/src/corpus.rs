//! Crowdtesting report corpora: loading, validation, label-derived ground
//! truth and the per-project statistics table.
//!
//! A corpus is described by a JSON manifest:
//!
//! ```json
//! { "image_root": "images",
//!   "projects": [ { "project_id": "P1", "file": "P1.jsonl" } ] }
//! ```
//!
//! Paths are resolved relative to the manifest's directory. Each project file
//! holds one JSON report record per line.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label value marking a report that has no duplicate.
pub const DEFAULT_SINGLETON_LABEL: &str = "UNIQUE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assessment {
    Passed,
    Failed,
}

/// One crowdtesting report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_id: String,
    pub project_id: String,
    pub environment: String,
    pub input_steps: String,
    pub result_description: String,
    /// Path relative to the corpus image root.
    pub screenshot: Option<String>,
    pub label: String,
    pub assessment: Assessment,
}

impl Report {
    /// The text that gets featurized: operation steps followed by the result
    /// description. Environment fields are not part of it.
    pub fn description(&self) -> String {
        let mut text =
            String::with_capacity(self.input_steps.len() + self.result_description.len() + 1);
        text.push_str(&self.input_steps);
        text.push('\n');
        text.push_str(&self.result_description);
        text
    }
}

/// Reports of one project in ingestion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    pub project_id: String,
    pub reports: Vec<Report>,
}

impl Project {
    /// Builds a project, checking that every report belongs to it and that
    /// report ids are unique.
    pub fn new(project_id: impl Into<String>, reports: Vec<Report>) -> Result<Self> {
        let project_id = project_id.into();
        let mut seen = HashSet::new();
        for report in &reports {
            if report.project_id != project_id {
                return Err(Error::Validation(format!(
                    "report `{}` carries project `{}` but belongs to `{}`",
                    report.report_id, report.project_id, project_id
                )));
            }
            if report.label.is_empty() {
                return Err(Error::Validation(format!(
                    "report `{}` has an empty label",
                    report.report_id
                )));
            }
            if !seen.insert(report.report_id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate report_id `{}`",
                    report.report_id
                )));
            }
        }
        Ok(Self {
            project_id,
            reports,
        })
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    pub fn position(&self, report_id: &str) -> Option<usize> {
        self.reports.iter().position(|r| r.report_id == report_id)
    }
}

/// A loaded corpus: projects plus the directory screenshots resolve against.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub image_root: PathBuf,
    pub projects: Vec<Project>,
}

impl Corpus {
    pub fn project(&self, project_id: &str) -> Option<&Project> {
        self.projects.iter().find(|p| p.project_id == project_id)
    }

    pub fn screenshot_path(&self, report: &Report) -> Option<PathBuf> {
        report
            .screenshot
            .as_ref()
            .map(|rel| self.image_root.join(rel))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub project_id: String,
    pub file: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub image_root: PathBuf,
    pub projects: Vec<ManifestEntry>,
}

/// Loads a corpus from its manifest, validating report ids and screenshot
/// references.
pub fn load_corpus(manifest_path: impl AsRef<Path>) -> Result<Corpus> {
    let manifest_path = manifest_path.as_ref();
    let raw = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&raw).map_err(|e| Error::Manifest {
        path: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let image_root = base.join(&manifest.image_root);

    let mut projects = Vec::with_capacity(manifest.projects.len());
    let mut all_ids: HashSet<String> = HashSet::new();
    for entry in &manifest.projects {
        let path = base.join(&entry.file);
        let reports = parse_records(&path)?;
        for report in &reports {
            if !all_ids.insert(report.report_id.clone()) {
                return Err(Error::Validation(format!(
                    "duplicate report_id `{}`",
                    report.report_id
                )));
            }
        }
        projects.push(Project::new(entry.project_id.clone(), reports)?);
    }

    let missing: Vec<PathBuf> = projects
        .iter()
        .flat_map(|p| p.reports.iter())
        .filter_map(|r| r.screenshot.as_ref())
        .map(|rel| image_root.join(rel))
        .filter(|p| !p.is_file())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingImages(missing));
    }

    Ok(Corpus {
        image_root,
        projects,
    })
}

/// Parses a line-delimited record file. Blank lines are skipped.
pub fn parse_records(path: &Path) -> Result<Vec<Report>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records_str(&raw, path)
}

pub(crate) fn parse_records_str(raw: &str, path: &Path) -> Result<Vec<Report>> {
    let mut reports = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let report: Report = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        reports.push(report);
    }
    Ok(reports)
}

/// Per-report duplicate sets derived from label equality within one project.
///
/// Indices refer to the project's ingestion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    report_ids: Vec<String>,
    duplicates: Vec<Vec<usize>>,
}

impl GroundTruth {
    /// Ground truth from parallel id and label lists.
    pub fn from_labels<S: AsRef<str>>(
        report_ids: Vec<String>,
        labels: &[S],
        singleton_label: Option<&str>,
    ) -> Result<Self> {
        if report_ids.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                left: report_ids.len(),
                right: labels.len(),
            });
        }
        let labels: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
        Ok(Self {
            report_ids,
            duplicates: duplicate_groups(&labels, singleton_label),
        })
    }

    pub fn len(&self) -> usize {
        self.report_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.report_ids.is_empty()
    }

    pub fn report_ids(&self) -> &[String] {
        &self.report_ids
    }

    /// Duplicates of the report at `index`, ascending.
    pub fn duplicates_at(&self, index: usize) -> &[usize] {
        &self.duplicates[index]
    }

    pub fn duplicates_of(&self, report_id: &str) -> Option<BTreeSet<&str>> {
        let idx = self.report_ids.iter().position(|r| r == report_id)?;
        Some(
            self.duplicates[idx]
                .iter()
                .map(|&j| self.report_ids[j].as_str())
                .collect(),
        )
    }

    /// Indices of reports with at least one duplicate; these are the
    /// evaluation queries.
    pub fn eligible_queries(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !self.duplicates[i].is_empty())
            .collect()
    }

    /// Number of unordered duplicate pairs.
    pub fn dup_pairs(&self) -> u64 {
        self.duplicates.iter().map(|d| d.len() as u64).sum::<u64>() / 2
    }

    pub fn to_map(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.report_ids
            .iter()
            .zip(&self.duplicates)
            .map(|(id, dups)| {
                (
                    id.clone(),
                    dups.iter().map(|&j| self.report_ids[j].clone()).collect(),
                )
            })
            .collect()
    }
}

/// Ground truth with the default singleton sentinel.
pub fn ground_truth(project: &Project) -> GroundTruth {
    ground_truth_with(project, Some(DEFAULT_SINGLETON_LABEL))
}

/// Ground truth where reports labelled `singleton_label` never match anything.
pub fn ground_truth_with(project: &Project, singleton_label: Option<&str>) -> GroundTruth {
    let labels: Vec<&str> = project.reports.iter().map(|r| r.label.as_str()).collect();
    let report_ids = project
        .reports
        .iter()
        .map(|r| r.report_id.clone())
        .collect();
    GroundTruth {
        report_ids,
        duplicates: duplicate_groups(&labels, singleton_label),
    }
}

pub(crate) fn duplicate_groups(labels: &[&str], singleton_label: Option<&str>) -> Vec<Vec<usize>> {
    let mut by_label: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, label) in labels.iter().enumerate() {
        if Some(*label) == singleton_label {
            continue;
        }
        by_label.entry(label).or_default().push(i);
    }
    let mut duplicates = vec![Vec::new(); labels.len()];
    for members in by_label.values() {
        for &i in members {
            duplicates[i] = members.iter().copied().filter(|&j| j != i).collect();
        }
    }
    duplicates
}

/// Per-project statistics: screenshot coverage, duplicate coverage and pair
/// counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_reports: u64,
    pub n_with_screenshot: u64,
    pub pct_screenshot: f64,
    pub n_with_duplicates: u64,
    pub pct_duplicates: f64,
    pub total_pairs: u64,
    pub dup_pairs: u64,
    pub pct_dup_pairs: f64,
}

pub fn total_pairs(n_reports: u64) -> u64 {
    n_reports * n_reports.saturating_sub(1) / 2
}

pub fn corpus_stats(project: &Project, ground_truth: &GroundTruth) -> CorpusStats {
    let n_reports = project.len() as u64;
    let n_with_screenshot = project
        .reports
        .iter()
        .filter(|r| r.screenshot.is_some())
        .count() as u64;
    let n_with_duplicates = ground_truth.eligible_queries().len() as u64;
    let total_pairs = total_pairs(n_reports);
    let dup_pairs = ground_truth.dup_pairs();
    CorpusStats {
        n_reports,
        n_with_screenshot,
        pct_screenshot: ratio(n_with_screenshot, n_reports),
        n_with_duplicates,
        pct_duplicates: ratio(n_with_duplicates, n_reports),
        total_pairs,
        dup_pairs,
        pct_dup_pairs: ratio(dup_pairs, total_pairs),
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[cfg(test)]
pub(crate) fn test_report(id: &str, project: &str, label: &str) -> Report {
    Report {
        report_id: id.to_string(),
        project_id: project.to_string(),
        environment: String::new(),
        input_steps: String::new(),
        result_description: String::new(),
        screenshot: None,
        label: label.to_string(),
        assessment: Assessment::Failed,
    }
}
