//! Fixtures shared by the benchmarks.

use setu_core::synthgen::{generate_corpus, ClusterSize, GeneratedCorpus, GeneratorSpec};
use setu_core::ProjectFeatures;

/// A generated project of roughly `n_reports` reports with its features.
pub fn project(n_reports: usize, seed: u64) -> (GeneratedCorpus, ProjectFeatures) {
    let n_clusters = n_reports / 4;
    let spec = GeneratorSpec {
        seed,
        n_clusters,
        cluster_size: ClusterSize { min: 2, max: 4 },
        n_singletons: n_reports.saturating_sub(n_clusters * 3),
        vocabulary_size: 4000,
        ..GeneratorSpec::default()
    };
    let corpus = generate_corpus(&spec).expect("benchmark spec is valid");
    let features = corpus
        .featurize(&corpus.resources())
        .expect("featurization succeeds");
    (corpus, features)
}
