//! Feature extraction for whole projects.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{Corpus, Project, Report};
use crate::error::{Error, Result};
use crate::image_features::{
    blank_descriptor, color_descriptor, decode_image, structure_descriptor, RasterImage,
};
use crate::similarity::FeatureBundle;
use crate::text_features::{
    build_tfidf_model, embed_report, load_embeddings, load_stopwords, load_synonyms, normalize,
    tfidf_vector, tokenize, EmbeddingTable, SegmentationConfig, TfIdfModel, TokenList,
};

/// Language resources used to turn report text into tokens and vectors.
#[derive(Debug, Clone)]
pub struct TextResources {
    pub segmentation: SegmentationConfig,
    pub stopwords: HashSet<String>,
    pub synonyms: HashMap<String, String>,
    pub embeddings: EmbeddingTable,
}

impl TextResources {
    pub fn new(embeddings: EmbeddingTable) -> Self {
        Self {
            segmentation: SegmentationConfig::default(),
            stopwords: HashSet::new(),
            synonyms: HashMap::new(),
            embeddings,
        }
    }

    pub fn load(stopwords: &Path, synonyms: &Path, embeddings: &Path) -> Result<Self> {
        Ok(Self {
            segmentation: SegmentationConfig::default(),
            stopwords: load_stopwords(stopwords)?,
            synonyms: load_synonyms(synonyms)?,
            embeddings: load_embeddings(embeddings)?,
        })
    }

    pub fn tokens(&self, text: &str) -> TokenList {
        normalize(
            &tokenize(text, &self.segmentation),
            &self.stopwords,
            &self.synonyms,
        )
    }
}

/// Feature bundles of one project, in ingestion order, plus the TF-IDF model
/// their sparse vectors index into.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectFeatures {
    pub project_id: String,
    pub report_ids: Vec<String>,
    pub has_screenshot: Vec<bool>,
    pub bundles: Vec<FeatureBundle>,
    pub tfidf_model: TfIdfModel,
}

impl ProjectFeatures {
    pub fn len(&self) -> usize {
        self.report_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.report_ids.is_empty()
    }

    pub fn position(&self, report_id: &str) -> Option<usize> {
        self.report_ids.iter().position(|r| r == report_id)
    }
}

/// Featurizes one project. `screenshot` supplies the raster for a report, or
/// `None` when it has no screenshot; such reports get the blank descriptors.
pub fn featurize_project<F>(
    project: &Project,
    resources: &TextResources,
    screenshot: F,
) -> Result<ProjectFeatures>
where
    F: Fn(&Report) -> Result<Option<RasterImage>> + Sync,
{
    if project.is_empty() {
        return Err(Error::Validation(format!(
            "project `{}` has no reports",
            project.project_id
        )));
    }
    let tokens: Vec<TokenList> = project
        .reports
        .par_iter()
        .map(|r| resources.tokens(&r.description()))
        .collect();
    let model = build_tfidf_model(&tokens)?;

    let bundles = project
        .reports
        .par_iter()
        .zip(tokens.par_iter())
        .map(|(report, toks)| {
            let (structure, color) = match screenshot(report)? {
                Some(img) => (structure_descriptor(&img), color_descriptor(&img)),
                None => blank_descriptor(),
            };
            Ok(FeatureBundle {
                structure,
                color,
                tfidf: tfidf_vector(toks, &model),
                embedding: embed_report(toks, &resources.embeddings),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ProjectFeatures {
        project_id: project.project_id.clone(),
        report_ids: project
            .reports
            .iter()
            .map(|r| r.report_id.clone())
            .collect(),
        has_screenshot: project
            .reports
            .iter()
            .map(|r| r.screenshot.is_some())
            .collect(),
        bundles,
        tfidf_model: model,
    })
}

/// Featurizes every project, reading screenshots from the corpus image root.
pub fn featurize_corpus(
    corpus: &Corpus,
    resources: &TextResources,
) -> Result<Vec<ProjectFeatures>> {
    corpus
        .projects
        .iter()
        .map(|project| {
            featurize_project(project, resources, |report| {
                let Some(path) = corpus.screenshot_path(report) else {
                    return Ok(None);
                };
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                decode_image(&bytes).map(Some).map_err(|e| {
                    Error::Decode(format!(
                        "report `{}` ({}): {e}",
                        report.report_id,
                        path.display()
                    ))
                })
            })
        })
        .collect()
}
