//! Multimodal duplicate crowdtesting report detection.
//!
//! Reports are represented by four feature vectors: two screenshot
//! descriptors (structure and color) and two text vectors (TF-IDF and
//! averaged word embeddings). Candidates are ranked against a query with a
//! hierarchical scheme: screenshot similarity decides which candidates share
//! the query's context, textual similarity orders them.
//!
//! The crate also carries the evaluation tooling (ranking metrics,
//! Mann-Whitney U, Cliff's delta, threshold tuning), a seeded synthetic
//! corpus generator and the binary feature store used by the `setu` CLI.

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod image_features;
pub mod pipeline;
pub mod ranker;
pub mod similarity;
pub mod store;
pub mod synthgen;
pub mod text_features;

pub use corpus::{
    corpus_stats, ground_truth, load_corpus, Corpus, CorpusStats, GroundTruth, Project, Report,
};
pub use error::{Error, Result};
pub use evaluation::{evaluate_project, MetricsReport, QueryEval, StatTestResult, TuningResult};
pub use image_features::{ColorVector, RasterImage, StructureVector};
pub use pipeline::{featurize_corpus, featurize_project, ProjectFeatures, TextResources};
pub use ranker::{rank_duplicates, ClassTag, CombinerKind, QueryResult, RankedEntry};
pub use similarity::{FeatureBundle, FeatureMask, ScoreMatrix, SimilarityScores};
pub use store::FeatureStore;
pub use synthgen::{generate_corpus, GeneratorSpec};
pub use text_features::{EmbeddingTable, TfIdfModel, TfIdfVector, TokenList};
