//! Command implementations. Each returns what it wrote so tests can inspect
//! results without re-reading files.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use log::info;
use serde::{Deserialize, Serialize};

use setu_core::corpus::{ground_truth, load_corpus, GroundTruth};
use setu_core::evaluation::{
    compare_samples, evaluate_with_matrix, improvement, leave_one_out, threshold_grid,
    Interpretation, LabelOracle, Method, Metric, MetricsReport, QueryEval, TuningProject,
};
use setu_core::pipeline::{featurize_corpus, TextResources};
use setu_core::ranker::rank_duplicates;
use setu_core::similarity::{FeatureMask, ScoreMatrix};
use setu_core::store::{FeatureStore, StoreExpectations, StoredProject};
use setu_core::synthgen::{generate_suite, write_corpus, SpecFile};
use setu_core::CombinerKind;

use crate::output::{format_float, to_json, write_csv, write_file, write_json};
use crate::{CompareArgs, EvaluateArgs, FeaturizeArgs, QueryArgs, SynthArgs, TuneArgs};

/// Default screenshot threshold for the hierarchical and text-first rankers.
pub const DEFAULT_THRES: f64 = 0.94;

pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const IMPROVEMENT_CSV: &str = "improvement.csv";
pub const PER_QUERY_DIR: &str = "perquery";

pub fn featurize(args: &FeaturizeArgs) -> Result<FeatureStore> {
    let corpus = load_corpus(&args.corpus)?;
    let resources = TextResources::load(&args.stopwords, &args.synonyms, &args.embeddings)?;
    let features = featurize_corpus(&corpus, &resources)?;
    let projects = features
        .into_iter()
        .zip(&corpus.projects)
        .map(|(features, project)| StoredProject {
            labels: project.reports.iter().map(|r| r.label.clone()).collect(),
            features,
        })
        .collect();
    let store = FeatureStore::new(resources.embeddings.dim(), projects)?;
    write_file(&args.out, &store.to_bytes()?)?;
    info!(
        "wrote {} records to {}",
        store.n_records(),
        args.out.display()
    );
    Ok(store)
}

pub fn query(args: &QueryArgs) -> Result<String> {
    let store = FeatureStore::read(
        &args.store,
        StoreExpectations {
            embedding_dim: args.embedding_dim,
        },
    )?;
    let combiner = CombinerKind::parse(&args.combiner, args.thres)?;
    let mask: FeatureMask = args.mask.parse()?;
    let (project, _) = store
        .locate(&args.report)
        .ok_or_else(|| anyhow!("unknown report `{}`", args.report))?;
    let mut result = rank_duplicates(&args.report, &project.features, combiner, mask)?;
    result.entries.truncate(args.top_k);
    to_json(&result)
}

/// Per-query values of one method, the input of `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDump {
    pub method: String,
    pub projects: Vec<ProjectQueries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectQueries {
    pub project_id: String,
    pub queries: Vec<QueryEval>,
}

#[derive(Serialize)]
struct MetricsRow<'a> {
    project_id: &'a str,
    method: &'a str,
    #[serde(rename = "recall@1")]
    recall_at_1: f64,
    #[serde(rename = "recall@5")]
    recall_at_5: f64,
    #[serde(rename = "recall@10")]
    recall_at_10: f64,
    #[serde(rename = "MAP")]
    map: f64,
    #[serde(rename = "MRR")]
    mrr: f64,
}

fn dump_file_name(method: &str) -> String {
    let safe: String = method
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.json")
}

/// Reports grouped as `reports[method][project]`.
pub fn evaluate(args: &EvaluateArgs) -> Result<Vec<Vec<MetricsReport>>> {
    ensure!(!args.methods.is_empty(), "no methods given");
    let store = FeatureStore::read(&args.store, StoreExpectations::default())?;
    let corpus = load_corpus(&args.corpus)?;
    let methods = args
        .methods
        .iter()
        .map(|m| Method::parse(m, args.thres))
        .collect::<setu_core::Result<Vec<_>>>()?;
    let mut labels = HashSet::new();
    for m in &methods {
        ensure!(
            labels.insert(m.label()),
            "method `{}` listed twice",
            m.label()
        );
    }

    let mut reports: Vec<Vec<MetricsReport>> = vec![Vec::new(); methods.len()];
    for project in &corpus.projects {
        let stored = store
            .project(&project.project_id)
            .ok_or_else(|| anyhow!("project `{}` is not in the store", project.project_id))?;
        let gt = ground_truth(project);
        ensure!(
            gt.report_ids() == stored.features.report_ids.as_slice(),
            "store and corpus disagree on the reports of project `{}`",
            project.project_id
        );
        let mut matrices: BTreeMap<&str, ScoreMatrix> = BTreeMap::new();
        for (i, m) in methods.iter().enumerate() {
            if !matrices.contains_key(m.mask.name()) {
                matrices.insert(
                    m.mask.name(),
                    ScoreMatrix::compute(&stored.features.bundles, m.mask)?,
                );
            }
            let report = evaluate_with_matrix(
                &project.project_id,
                &m.label(),
                &matrices[m.mask.name()],
                &gt,
                m.combiner,
            )
            .with_context(|| format!("evaluating {} on {}", m.label(), project.project_id))?;
            reports[i].push(report);
        }
    }

    let rows: Vec<MetricsRow> = reports
        .iter()
        .flatten()
        .map(|r| MetricsRow {
            project_id: &r.project_id,
            method: &r.method,
            recall_at_1: r.recall_at_1,
            recall_at_5: r.recall_at_5,
            recall_at_10: r.recall_at_10,
            map: r.map,
            mrr: r.mrr,
        })
        .collect();
    let mut header = vec!["project_id", "method"];
    header.extend(Metric::ALL.iter().map(Metric::name));
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.project_id.to_string(), r.method.to_string()];
            row.extend(
                [r.recall_at_1, r.recall_at_5, r.recall_at_10, r.map, r.mrr].map(format_float),
            );
            row
        })
        .collect();
    write_csv(&args.out.join(METRICS_CSV), &header, &csv_rows)?;
    write_json(&args.out.join(METRICS_JSON), &rows)?;

    let mut imp_header = vec!["project_id", "method", "baseline"];
    imp_header.extend(Metric::ALL.iter().map(Metric::name));
    let mut imp_rows = Vec::new();
    for baseline in &reports[1..] {
        for (ours, base) in reports[0].iter().zip(baseline) {
            let mut row = vec![
                ours.project_id.clone(),
                ours.method.clone(),
                base.method.clone(),
            ];
            // undefined when the baseline scores zero
            row.extend(Metric::ALL.iter().map(|&m| {
                improvement(ours.metric(m), base.metric(m))
                    .map(format_float)
                    .unwrap_or_default()
            }));
            imp_rows.push(row);
        }
    }
    write_csv(&args.out.join(IMPROVEMENT_CSV), &imp_header, &imp_rows)?;

    for per_method in &reports {
        let dump = QueryDump {
            method: per_method[0].method.clone(),
            projects: per_method
                .iter()
                .map(|r| ProjectQueries {
                    project_id: r.project_id.clone(),
                    queries: r.queries.clone(),
                })
                .collect(),
        };
        write_json(
            &args
                .out
                .join(PER_QUERY_DIR)
                .join(dump_file_name(&dump.method)),
            &dump,
        )?;
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub project_id: String,
    pub metric: Metric,
    pub method_a: String,
    pub method_b: String,
    pub u_statistic: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub cliffs_delta: f64,
    pub interpretation: Interpretation,
}

fn read_dump(path: &Path) -> Result<QueryDump> {
    let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))
}

/// Tests, per project and metric, whether method `a` beats method `b`.
/// p-values are adjusted for the number of tests in the run.
pub fn compare_dumps(a: &QueryDump, b: &QueryDump) -> Result<Vec<ComparisonRow>> {
    let ids = |d: &QueryDump| {
        d.projects
            .iter()
            .map(|p| p.project_id.clone())
            .collect::<Vec<_>>()
    };
    ensure!(
        ids(a) == ids(b),
        "dumps cover different projects: {:?} vs {:?}",
        ids(a),
        ids(b)
    );
    let m = a.projects.len() * Metric::ALL.len();
    let mut rows = Vec::with_capacity(m);
    for (pa, pb) in a.projects.iter().zip(&b.projects) {
        let qa: Vec<&str> = pa.queries.iter().map(|q| q.query_id.as_str()).collect();
        let qb: Vec<&str> = pb.queries.iter().map(|q| q.query_id.as_str()).collect();
        ensure!(
            qa == qb,
            "dumps disagree on the queries of project `{}`",
            pa.project_id
        );
        for metric in Metric::ALL {
            let xs: Vec<f64> = pa.queries.iter().map(|q| q.metric(metric)).collect();
            let ys: Vec<f64> = pb.queries.iter().map(|q| q.metric(metric)).collect();
            let r = compare_samples(&xs, &ys, m)?;
            rows.push(ComparisonRow {
                project_id: pa.project_id.clone(),
                metric,
                method_a: a.method.clone(),
                method_b: b.method.clone(),
                u_statistic: r.u_statistic,
                p_value: r.p_value,
                p_adjusted: r.p_adjusted,
                cliffs_delta: r.cliffs_delta,
                interpretation: r.interpretation,
            });
        }
    }
    Ok(rows)
}

pub fn compare(args: &CompareArgs) -> Result<Vec<ComparisonRow>> {
    let rows = compare_dumps(&read_dump(&args.a)?, &read_dump(&args.b)?)?;
    if args
        .out
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        let header = [
            "project_id",
            "metric",
            "method_a",
            "method_b",
            "u_statistic",
            "p_value",
            "p_adjusted",
            "cliffs_delta",
            "interpretation",
        ];
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.project_id.clone(),
                    r.metric.name().to_string(),
                    r.method_a.clone(),
                    r.method_b.clone(),
                    format_float(r.u_statistic),
                    format_float(r.p_value),
                    format_float(r.p_adjusted),
                    format_float(r.cliffs_delta),
                    r.interpretation.name().to_string(),
                ]
            })
            .collect();
        write_csv(&args.out, &header, &csv_rows)?;
    } else {
        write_json(&args.out, &rows)?;
    }
    Ok(rows)
}

/// Labels of every loaded store, looked up by project.
struct StoreLabels(Vec<FeatureStore>);

impl LabelOracle for StoreLabels {
    fn ground_truth(&self, project_id: &str) -> setu_core::Result<GroundTruth> {
        self.0
            .iter()
            .find(|s| s.project(project_id).is_some())
            .ok_or_else(|| {
                setu_core::Error::InvalidArgument(format!("no labels for project `{project_id}`"))
            })?
            .ground_truth(project_id)
    }
}

/// Stores in `dir` with the `.store` extension, sorted by file name.
pub fn store_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "store"))
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn tune(args: &TuneArgs) -> Result<String> {
    let mask: FeatureMask = args.mask.parse()?;
    let grid = threshold_grid(args.grid_step)?;
    let stores = store_paths(&args.stores)?
        .iter()
        .map(|p| {
            FeatureStore::read(p, StoreExpectations::default())
                .with_context(|| format!("loading {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut seen = HashSet::new();
    let mut projects = Vec::new();
    for store in &stores {
        for p in &store.projects {
            ensure!(
                seen.insert(p.features.project_id.clone()),
                "project `{}` appears in more than one store",
                p.features.project_id
            );
            projects.push(TuningProject::from_features(&p.features, mask)?);
        }
    }
    if projects.len() < 2 {
        bail!("tuning needs at least 2 projects, found {}", projects.len());
    }
    let labels = StoreLabels(stores);
    match &args.holdout {
        Some(h) => to_json(&leave_one_out(&projects, &labels, &grid, h)?),
        None => {
            let folds = projects
                .iter()
                .map(|p| leave_one_out(&projects, &labels, &grid, &p.project_id))
                .collect::<setu_core::Result<Vec<_>>>()?;
            to_json(&folds)
        }
    }
}

pub fn synth(args: &SynthArgs) -> Result<PathBuf> {
    let mut specs = SpecFile::load(&args.spec)?;
    if let Some(seed) = args.seed {
        for (i, s) in specs.iter_mut().enumerate() {
            s.seed = seed.wrapping_add(i as u64);
        }
    }
    let corpora = generate_suite(&specs)?;
    let manifest = write_corpus(&args.out, &corpora)?;
    info!("wrote {} projects to {}", corpora.len(), args.out.display());
    Ok(manifest)
}
