//! Binary feature store.
//!
//! Layout: the 8-byte magic `SETUFS01`, a little-endian `u32` header length,
//! a JSON header (format and descriptor versions, dimensions, per-project
//! TF-IDF vocabularies), then one length-prefixed record per report. A record
//! holds the report id, project id, label, a screenshot flag and the four
//! feature vectors as little-endian `f64` (sparse TF-IDF as `u32` column and
//! `f64` weight pairs). Readers refuse stores whose versions or dimensions do
//! not match what they expect.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{GroundTruth, DEFAULT_SINGLETON_LABEL};
use crate::error::{Error, Result};
use crate::evaluation::LabelOracle;
use crate::image_features::{ColorVector, StructureVector, COLOR_DIM, STRUCTURE_DIM};
use crate::pipeline::ProjectFeatures;
use crate::similarity::FeatureBundle;
use crate::text_features::{EmbeddingVector, TfIdfModel, TfIdfVector};

pub const MAGIC: &[u8; 8] = b"SETUFS01";
pub const FORMAT_VERSION: u32 = 1;
/// Identifies the descriptor algorithms that produced the stored vectors.
pub const DESCRIPTOR_VERSION: &str = "grad-4x4x8/hsv-3x3x21/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreProjectMeta {
    pub project_id: String,
    pub n_documents: u32,
    pub vocabulary: Vec<String>,
    pub document_frequency: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreHeader {
    pub format_version: u32,
    pub descriptor_version: String,
    pub structure_dim: usize,
    pub color_dim: usize,
    pub embedding_dim: usize,
    pub n_records: usize,
    pub projects: Vec<StoreProjectMeta>,
}

/// What a reader requires of a store.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StoreExpectations {
    pub embedding_dim: Option<usize>,
}

/// One project in the store: its features and the labels of its reports.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredProject {
    pub features: ProjectFeatures,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    pub embedding_dim: usize,
    pub projects: Vec<StoredProject>,
}

impl FeatureStore {
    pub fn new(embedding_dim: usize, projects: Vec<StoredProject>) -> Result<Self> {
        for p in &projects {
            if p.labels.len() != p.features.len() || p.features.bundles.len() != p.features.len() {
                return Err(Error::Store(format!(
                    "project `{}` has inconsistent lengths",
                    p.features.project_id
                )));
            }
            for b in &p.features.bundles {
                if b.embedding.0.len() != embedding_dim {
                    return Err(Error::DimensionMismatch {
                        left: embedding_dim,
                        right: b.embedding.0.len(),
                    });
                }
            }
        }
        Ok(Self {
            embedding_dim,
            projects,
        })
    }

    pub fn project(&self, project_id: &str) -> Option<&StoredProject> {
        self.projects
            .iter()
            .find(|p| p.features.project_id == project_id)
    }

    /// Finds the project containing `report_id`.
    pub fn locate(&self, report_id: &str) -> Option<(&StoredProject, usize)> {
        self.projects
            .iter()
            .find_map(|p| p.features.position(report_id).map(|i| (p, i)))
    }

    pub fn n_records(&self) -> usize {
        self.projects.iter().map(|p| p.features.len()).sum()
    }

    pub fn header(&self) -> StoreHeader {
        StoreHeader {
            format_version: FORMAT_VERSION,
            descriptor_version: DESCRIPTOR_VERSION.to_string(),
            structure_dim: STRUCTURE_DIM,
            color_dim: COLOR_DIM,
            embedding_dim: self.embedding_dim,
            n_records: self.n_records(),
            projects: self
                .projects
                .iter()
                .map(|p| StoreProjectMeta {
                    project_id: p.features.project_id.clone(),
                    n_documents: p.features.tfidf_model.n_documents(),
                    vocabulary: p.features.tfidf_model.terms().to_vec(),
                    document_frequency: p.features.tfidf_model.document_frequency().to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header()).map_err(|e| Error::Store(e.to_string()))?;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        let mut record = Vec::new();
        for project in &self.projects {
            let f = &project.features;
            for i in 0..f.len() {
                record.clear();
                put_str(&mut record, &f.report_ids[i]);
                put_str(&mut record, &f.project_id);
                put_str(&mut record, &project.labels[i]);
                record.push(f.has_screenshot[i] as u8);
                let b = &f.bundles[i];
                put_f64s(&mut record, &b.structure.0);
                put_f64s(&mut record, &b.color.0);
                record.extend_from_slice(&(b.tfidf.0.len() as u32).to_le_bytes());
                for (col, w) in &b.tfidf.0 {
                    record.extend_from_slice(&col.to_le_bytes());
                    record.extend_from_slice(&w.to_le_bytes());
                }
                put_f64s(&mut record, &b.embedding.0);
                out.extend_from_slice(&(record.len() as u32).to_le_bytes());
                out.extend_from_slice(&record);
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], expect: StoreExpectations) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Store("not a feature store (bad magic)".into()));
        }
        let header_len = r.u32()? as usize;
        let header: StoreHeader = serde_json::from_slice(r.take(header_len)?)
            .map_err(|e| Error::Store(format!("bad header: {e}")))?;
        check_header(&header, expect)?;

        let mut projects: Vec<StoredProject> = header
            .projects
            .iter()
            .map(|meta| {
                let model = TfIdfModel::from_parts(
                    meta.vocabulary.clone(),
                    meta.document_frequency.clone(),
                    meta.n_documents,
                )?;
                Ok(StoredProject {
                    features: ProjectFeatures {
                        project_id: meta.project_id.clone(),
                        report_ids: Vec::new(),
                        has_screenshot: Vec::new(),
                        bundles: Vec::new(),
                        tfidf_model: model,
                    },
                    labels: Vec::new(),
                })
            })
            .collect::<Result<_>>()?;

        for _ in 0..header.n_records {
            let len = r.u32()? as usize;
            let mut rec = Reader {
                bytes: r.take(len)?,
                pos: 0,
            };
            let report_id = rec.string()?;
            let project_id = rec.string()?;
            let label = rec.string()?;
            let has_screenshot = rec.take(1)?[0] != 0;
            let structure = StructureVector(rec.f64s(header.structure_dim)?);
            let color = ColorVector(rec.f64s(header.color_dim)?);
            let nnz = rec.u32()? as usize;
            let mut entries = Vec::with_capacity(nnz);
            for _ in 0..nnz {
                let col = rec.u32()?;
                entries.push((col, rec.f64()?));
            }
            let embedding = EmbeddingVector(rec.f64s(header.embedding_dim)?);
            if rec.pos != rec.bytes.len() {
                return Err(Error::Store(format!(
                    "trailing bytes in record `{report_id}`"
                )));
            }

            let project = projects
                .iter_mut()
                .find(|p| p.features.project_id == project_id)
                .ok_or_else(|| {
                    Error::Store(format!(
                        "record `{report_id}` names unknown project `{project_id}`"
                    ))
                })?;
            let vocab = project.features.tfidf_model.vocabulary_size() as u32;
            if entries.iter().any(|(c, _)| *c >= vocab) {
                return Err(Error::Store(format!(
                    "record `{report_id}` indexes past the vocabulary"
                )));
            }
            let f = &mut project.features;
            f.report_ids.push(report_id);
            f.has_screenshot.push(has_screenshot);
            f.bundles.push(FeatureBundle {
                structure,
                color,
                tfidf: TfIdfVector(entries),
                embedding,
            });
            project.labels.push(label);
        }
        if r.pos != bytes.len() {
            return Err(Error::Store("trailing bytes after the last record".into()));
        }
        Self::new(header.embedding_dim, projects)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>, expect: StoreExpectations) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, expect)
    }
}

impl LabelOracle for FeatureStore {
    fn ground_truth(&self, project_id: &str) -> Result<GroundTruth> {
        let project = self
            .project(project_id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown project `{project_id}`")))?;
        GroundTruth::from_labels(
            project.features.report_ids.clone(),
            &project.labels,
            Some(DEFAULT_SINGLETON_LABEL),
        )
    }
}

fn check_header(header: &StoreHeader, expect: StoreExpectations) -> Result<()> {
    if header.format_version != FORMAT_VERSION {
        return Err(Error::StoreVersion(format!(
            "format version {} (expected {FORMAT_VERSION})",
            header.format_version
        )));
    }
    if header.descriptor_version != DESCRIPTOR_VERSION
        || header.structure_dim != STRUCTURE_DIM
        || header.color_dim != COLOR_DIM
    {
        return Err(Error::StoreVersion(format!(
            "descriptor version `{}` ({}+{} dims), expected `{DESCRIPTOR_VERSION}` ({STRUCTURE_DIM}+{COLOR_DIM})",
            header.descriptor_version, header.structure_dim, header.color_dim
        )));
    }
    if let Some(d) = expect.embedding_dim {
        if d != header.embedding_dim {
            return Err(Error::StoreVersion(format!(
                "store has embedding dimension {}, configuration expects {d}",
                header.embedding_dim
            )));
        }
    }
    Ok(())
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn put_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Store("truncated store".into()))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| Error::Store("invalid utf-8 string".into()))
    }
}
