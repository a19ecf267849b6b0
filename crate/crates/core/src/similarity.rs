//! Per-feature cosine similarities and their fusion into screenshot, textual
//! and total similarity.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_features::{ColorVector, StructureVector};
use crate::text_features::{EmbeddingVector, TfIdfVector};

/// The four feature vectors of one report.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    pub structure: StructureVector,
    pub color: ColorVector,
    pub tfidf: TfIdfVector,
    pub embedding: EmbeddingVector,
}

/// Which features take part in similarity. A group with no enabled member
/// contributes 0 and is unavailable to the ranker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMask {
    pub use_structure: bool,
    pub use_color: bool,
    pub use_tfidf: bool,
    pub use_embedding: bool,
}

impl FeatureMask {
    pub const FULL: Self = Self::new(true, true, true, true);
    pub const NO_TFIDF: Self = Self::new(true, true, false, true);
    pub const NO_EMBEDDING: Self = Self::new(true, true, true, false);
    pub const NO_COLOR: Self = Self::new(true, false, true, true);
    pub const NO_STRUCTURE: Self = Self::new(false, true, true, true);

    pub const fn new(
        use_structure: bool,
        use_color: bool,
        use_tfidf: bool,
        use_embedding: bool,
    ) -> Self {
        Self {
            use_structure,
            use_color,
            use_tfidf,
            use_embedding,
        }
    }

    pub fn screenshot_available(&self) -> bool {
        self.use_structure || self.use_color
    }

    pub fn textual_available(&self) -> bool {
        self.use_tfidf || self.use_embedding
    }

    pub fn name(&self) -> &'static str {
        match *self {
            Self::FULL => "full",
            Self::NO_TFIDF => "notf",
            Self::NO_EMBEDDING => "noemb",
            Self::NO_COLOR => "noclr",
            Self::NO_STRUCTURE => "nostrc",
            _ => "custom",
        }
    }
}

impl Default for FeatureMask {
    fn default() -> Self {
        Self::FULL
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Self::FULL),
            "notf" => Ok(Self::NO_TFIDF),
            "noemb" => Ok(Self::NO_EMBEDDING),
            "noclr" => Ok(Self::NO_COLOR),
            "nostrc" => Ok(Self::NO_STRUCTURE),
            other => Err(Error::Config(format!("unknown feature mask `{other}`"))),
        }
    }
}

/// The seven similarity scalars of one (query, candidate) pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimilarityScores {
    pub s_structure: f64,
    pub s_color: f64,
    pub s_tfidf: f64,
    pub s_embedding: f64,
    pub s_screenshot: f64,
    pub s_textual: f64,
    pub s_total: f64,
}

/// Cosine of two dense vectors; 0 when either norm is 0.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    Ok(finish_cosine(dot, na, nb))
}

/// Cosine of two sparse vectors aligned by column.
pub fn sparse_cosine(a: &TfIdfVector, b: &TfIdfVector) -> f64 {
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.0.len() && j < b.0.len() {
        let (ca, wa) = a.0[i];
        let (cb, wb) = b.0[j];
        if ca == cb {
            dot += wa * wb;
            i += 1;
            j += 1;
        } else if ca < cb {
            i += 1;
        } else {
            j += 1;
        }
    }
    let na = a.0.iter().map(|(_, w)| w * w).sum();
    let nb = b.0.iter().map(|(_, w)| w * w).sum();
    finish_cosine(dot, na, nb)
}

fn finish_cosine(dot: f64, norm_sq_a: f64, norm_sq_b: f64) -> f64 {
    if norm_sq_a == 0.0 || norm_sq_b == 0.0 {
        0.0
    } else {
        dot / (norm_sq_a.sqrt() * norm_sq_b.sqrt())
    }
}

/// Clamps a raw cosine into the [0, 1] score range.
fn clamp_unit(c: f64) -> f64 {
    c.clamp(0.0, 1.0)
}

/// Fuses per-feature similarities with equal-weight means over the enabled
/// members of each group. Disabled features report 0.
pub fn fuse(
    structure: f64,
    color: f64,
    tfidf: f64,
    embedding: f64,
    mask: FeatureMask,
) -> SimilarityScores {
    let pick = |on: bool, v: f64| if on { clamp_unit(v) } else { 0.0 };
    let s_structure = pick(mask.use_structure, structure);
    let s_color = pick(mask.use_color, color);
    let s_tfidf = pick(mask.use_tfidf, tfidf);
    let s_embedding = pick(mask.use_embedding, embedding);
    let s_screenshot = group_mean(&[(mask.use_structure, s_structure), (mask.use_color, s_color)]);
    let s_textual = group_mean(&[(mask.use_tfidf, s_tfidf), (mask.use_embedding, s_embedding)]);
    SimilarityScores {
        s_structure,
        s_color,
        s_tfidf,
        s_embedding,
        s_screenshot,
        s_textual,
        s_total: (s_screenshot + s_textual) / 2.0,
    }
}

fn group_mean(members: &[(bool, f64)]) -> f64 {
    let enabled: Vec<f64> = members
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, v)| *v)
        .collect();
    match enabled.len() {
        0 => 0.0,
        1 => enabled[0],
        n => enabled.iter().sum::<f64>() / n as f64,
    }
}

/// Scores one pair of reports.
pub fn score_pair(
    a: &FeatureBundle,
    b: &FeatureBundle,
    mask: FeatureMask,
) -> Result<SimilarityScores> {
    let structure = if mask.use_structure {
        cosine(&a.structure.0, &b.structure.0)?
    } else {
        0.0
    };
    let color = if mask.use_color {
        cosine(&a.color.0, &b.color.0)?
    } else {
        0.0
    };
    let tfidf = if mask.use_tfidf {
        sparse_cosine(&a.tfidf, &b.tfidf)
    } else {
        0.0
    };
    let embedding = if mask.use_embedding {
        cosine(&a.embedding.0, &b.embedding.0)?
    } else {
        0.0
    };
    Ok(fuse(structure, color, tfidf, embedding, mask))
}

/// All-pairs similarity within one project, computed once and shared by every
/// query and threshold.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    n: usize,
    mask: FeatureMask,
    scores: Vec<SimilarityScores>,
}

impl ScoreMatrix {
    pub fn compute(bundles: &[FeatureBundle], mask: FeatureMask) -> Result<Self> {
        let n = bundles.len();
        let rows: Vec<Vec<SimilarityScores>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if j < i {
                            Ok(SimilarityScores::default())
                        } else {
                            score_pair(&bundles[i], &bundles[j], mask)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut scores: Vec<SimilarityScores> = rows.into_iter().flatten().collect();
        for i in 0..n {
            for j in 0..i {
                scores[i * n + j] = scores[j * n + i];
            }
        }
        Ok(Self { n, mask, scores })
    }

    /// Builds a matrix from explicit scores; `scores` is row-major n×n.
    pub fn from_scores(n: usize, mask: FeatureMask, scores: Vec<SimilarityScores>) -> Result<Self> {
        if scores.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: scores.len(),
            });
        }
        Ok(Self { n, mask, scores })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mask(&self) -> FeatureMask {
        self.mask
    }

    pub fn get(&self, i: usize, j: usize) -> &SimilarityScores {
        &self.scores[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image_features::{COLOR_DIM, STRUCTURE_DIM};
    use proptest::prelude::*;

    fn bundle(
        structure: Vec<f64>,
        color: Vec<f64>,
        tfidf: Vec<(u32, f64)>,
        embedding: Vec<f64>,
    ) -> FeatureBundle {
        FeatureBundle {
            structure: StructureVector(structure),
            color: ColorVector(color),
            tfidf: TfIdfVector(tfidf),
            embedding: EmbeddingVector(embedding),
        }
    }

    fn padded(head: &[f64], dim: usize) -> Vec<f64> {
        let mut v = head.to_vec();
        v.resize(dim, 0.0);
        v
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((c - 32.0 / (14f64.sqrt() * 77f64.sqrt())).abs() < 1e-15);
        assert!((c - 0.974631846).abs() < 1e-9);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sparse_cosine_aligns_by_column() {
        let a = TfIdfVector(vec![(0, 1.0), (2, 2.0), (5, 3.0)]);
        let b = TfIdfVector(vec![(1, 7.0), (2, 5.0), (5, 6.0)]);
        let dense_a = [1.0, 0.0, 2.0, 0.0, 0.0, 3.0];
        let dense_b = [0.0, 7.0, 5.0, 0.0, 0.0, 6.0];
        assert!((sparse_cosine(&a, &b) - cosine(&dense_a, &dense_b).unwrap()).abs() < 1e-15);
        assert_eq!(sparse_cosine(&a, &TfIdfVector::default()), 0.0);
    }

    #[test]
    fn self_similarity_is_one() {
        let b = bundle(
            padded(&[0.6, 0.8], STRUCTURE_DIM),
            padded(&[1.0], COLOR_DIM),
            vec![(3, 2.0), (7, 1.0)],
            vec![0.3, -0.2, 0.9],
        );
        let s = score_pair(&b, &b, FeatureMask::FULL).unwrap();
        for v in [
            s.s_structure,
            s.s_color,
            s.s_tfidf,
            s.s_embedding,
            s.s_screenshot,
            s.s_textual,
            s.s_total,
        ] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_vectors_score_zero() {
        let b = bundle(
            vec![0.0; STRUCTURE_DIM],
            padded(&[1.0], COLOR_DIM),
            vec![],
            vec![0.0; 3],
        );
        let s = score_pair(&b, &b, FeatureMask::FULL).unwrap();
        assert_eq!(s.s_structure, 0.0);
        assert_eq!(s.s_tfidf, 0.0);
        assert_eq!(s.s_embedding, 0.0);
        assert_eq!(s.s_color, 1.0);
        assert_eq!(s.s_screenshot, 0.5);
    }

    #[test]
    fn single_member_group_under_ablation() {
        let s = fuse(0.8, 0.3, 0.5, 0.7, FeatureMask::NO_COLOR);
        assert_eq!(s.s_screenshot, 0.8);
        assert_eq!(s.s_color, 0.0);
        assert!((s.s_textual - 0.6).abs() < 1e-15);
        assert_eq!(s.s_total, (s.s_screenshot + s.s_textual) / 2.0);
    }

    #[test]
    fn hand_built_bundles() {
        // structure (1,0) vs (1,1): 1/sqrt2; color (1,0) vs (1,0): 1;
        // tfidf {0:1,1:1} vs {1:2}: 2/(sqrt2*2) = 1/sqrt2;
        // embedding (1,0,0) vs (-1,1,0): -1/sqrt2, clamped to 0.
        let a = bundle(
            padded(&[1.0, 0.0], STRUCTURE_DIM),
            padded(&[1.0], COLOR_DIM),
            vec![(0, 1.0), (1, 1.0)],
            vec![1.0, 0.0, 0.0],
        );
        let b = bundle(
            padded(&[1.0, 1.0], STRUCTURE_DIM),
            padded(&[1.0], COLOR_DIM),
            vec![(1, 2.0)],
            vec![-1.0, 1.0, 0.0],
        );
        let s = score_pair(&a, &b, FeatureMask::FULL).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.s_structure - r).abs() < 1e-15);
        assert_eq!(s.s_color, 1.0);
        assert!((s.s_tfidf - r).abs() < 1e-15);
        assert_eq!(s.s_embedding, 0.0);
        assert!((s.s_screenshot - (r + 1.0) / 2.0).abs() < 1e-15);
        assert!((s.s_textual - r / 2.0).abs() < 1e-15);
        assert!((s.s_total - ((r + 1.0) / 2.0 + r / 2.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn mask_names_round_trip() {
        for name in ["full", "notf", "noemb", "noclr", "nostrc"] {
            assert_eq!(name.parse::<FeatureMask>().unwrap().name(), name);
        }
        assert!("nope".parse::<FeatureMask>().is_err());
    }

    #[test]
    fn matrix_is_symmetric_and_matches_pairs() {
        let bundles: Vec<FeatureBundle> = (0..4)
            .map(|i| {
                let f = i as f64;
                bundle(
                    padded(&[1.0, f], STRUCTURE_DIM),
                    padded(&[f, 1.0, 0.5], COLOR_DIM),
                    vec![(i as u32, 1.0), (9, f + 1.0)],
                    vec![f - 1.5, 1.0, 0.2],
                )
            })
            .collect();
        let m = ScoreMatrix::compute(&bundles, FeatureMask::FULL).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.get(i, j), m.get(j, i));
                let direct = score_pair(&bundles[i], &bundles[j], FeatureMask::FULL).unwrap();
                assert_eq!(m.get(i.min(j), i.max(j)), &direct);
            }
        }
    }

    fn mask_strategy() -> impl Strategy<Value = FeatureMask> {
        (any::<bool>(), any::<bool>(), any::<bool>(), any::<bool>())
            .prop_map(|(a, b, c, d)| FeatureMask::new(a, b, c, d))
    }

    proptest! {
        #[test]
        fn fused_scores_stay_in_range(f in prop::array::uniform4(-1.0f64..=1.0), mask in mask_strategy()) {
            let s = fuse(f[0], f[1], f[2], f[3], mask);
            for v in [s.s_structure, s.s_color, s.s_tfidf, s.s_embedding, s.s_screenshot, s.s_textual, s.s_total] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert_eq!(s.s_total, (s.s_screenshot + s.s_textual) / 2.0);
        }

        #[test]
        fn fusion_is_monotone(f in prop::array::uniform4(0.0f64..=1.0), which in 0usize..4, bump in 0.0f64..1.0, mask in mask_strategy()) {
            let mut g = f;
            g[which] = (g[which] + bump).min(1.0);
            let lo = fuse(f[0], f[1], f[2], f[3], mask);
            let hi = fuse(g[0], g[1], g[2], g[3], mask);
            prop_assert!(hi.s_total >= lo.s_total);
        }

        #[test]
        fn score_pair_is_symmetric(
            sa in prop::collection::vec(0.0f64..1.0, STRUCTURE_DIM),
            sb in prop::collection::vec(0.0f64..1.0, STRUCTURE_DIM),
            ea in prop::collection::vec(-1.0f64..1.0, 5),
            eb in prop::collection::vec(-1.0f64..1.0, 5),
            mask in mask_strategy(),
        ) {
            let a = bundle(sa, vec![0.5; COLOR_DIM], vec![(1, 2.0), (4, 1.0)], ea);
            let b = bundle(sb, padded(&[1.0], COLOR_DIM), vec![(1, 1.0)], eb);
            prop_assert_eq!(score_pair(&a, &b, mask).unwrap(), score_pair(&b, &a, mask).unwrap());
        }
    }
}
