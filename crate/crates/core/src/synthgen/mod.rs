//! Seeded synthetic corpora with planted duplicate structure.
//!
//! Every cluster of duplicates gets its own token pool and its own screen
//! layout. Two confusion patterns can be injected on top:
//!
//! * pattern 1 — a non-duplicate with the same token multiset as an anchor
//!   report but a different screen;
//! * pattern 2 — a non-duplicate with the anchor's exact screenshot but
//!   disjoint content tokens.
//!
//! With `planted_threshold` set, pattern-1 confusables and the anchor's
//! duplicates are morphed so that their screenshot similarity to the anchor
//! sits just below and just above the planted value, which makes the
//! MAP-vs-threshold curve peak there.

pub mod layout;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    Assessment, Manifest, ManifestEntry, Project, Report, DEFAULT_SINGLETON_LABEL,
};
use crate::error::{Error, Result};
use crate::image_features::RasterImage;
use crate::pipeline::{featurize_project, ProjectFeatures, TextResources};
use crate::text_features::EmbeddingTable;

pub use layout::{Descriptors, Layout, LayoutLibrary, NoiseField, DISTINCT_LAYOUT_LIMIT};

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";
const SYLLABLES_PER_WORD: u32 = 3;
const SYNONYM_SUFFIX: char = 'x';

pub const STOPWORDS: &[&str] = &[
    "the", "a", "an", "to", "of", "and", "is", "it", "on", "in", "when", "after", "then",
];

const ENVIRONMENTS: &[&str] = &[
    "Android 9 / Pixel 2",
    "Android 10 / Galaxy S9",
    "Android 11 / Mi 10",
    "iOS 13 / iPhone 8",
    "iOS 14 / iPhone 11",
];

/// Largest vocabulary the pseudo-word scheme can spell.
pub fn max_vocabulary() -> usize {
    (CONSONANTS.len() * VOWELS.len()).pow(SYLLABLES_PER_WORD)
}

/// The `index`-th pseudo-word, e.g. `bababa`, `dababa`, ...
pub fn word(index: usize) -> String {
    let n = CONSONANTS.len() * VOWELS.len();
    let mut rest = index;
    let mut out = String::with_capacity(2 * SYLLABLES_PER_WORD as usize);
    for _ in 0..SYLLABLES_PER_WORD {
        let syl = rest % n;
        rest /= n;
        out.push(CONSONANTS[syl / VOWELS.len()] as char);
        out.push(VOWELS[syl % VOWELS.len()] as char);
    }
    out
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Deterministic word vector with components uniform in [-1, 1).
pub fn word_vector(word: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(
        fnv1a(word.as_bytes()) ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15),
    );
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSize {
    pub min: usize,
    pub max: usize,
}

/// Generation parameters. Missing fields in a spec file take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub project_id: String,
    pub n_clusters: usize,
    /// Cluster sizes are drawn uniformly from `min..=max`.
    pub cluster_size: ClusterSize,
    /// Reports without any duplicate.
    pub n_singletons: usize,
    pub vocabulary_size: usize,
    /// Distinct words in each cluster's token pool.
    pub pool_size: usize,
    pub tokens_per_report: usize,
    /// Probability that a token of a cluster member comes from the cluster pool
    /// rather than from background vocabulary.
    pub intra_overlap: f64,
    /// Fraction of every cluster pool drawn from a vocabulary shared by all
    /// clusters.
    pub cross_overlap: f64,
    /// Probability that a cluster member shows the cluster's screen.
    pub screenshot_reuse: f64,
    /// Probability that a report has a screenshot at all.
    pub screenshot_coverage: f64,
    pub pattern1_pairs: usize,
    pub pattern2_pairs: usize,
    pub planted_threshold: Option<f64>,
    pub stopword_rate: f64,
    pub synonym_rate: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub embedding_dim: usize,
    /// Word vectors depend only on the word and this seed, so projects of one
    /// suite share an embedding file.
    pub embedding_seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            project_id: "P1".into(),
            n_clusters: 5,
            cluster_size: ClusterSize { min: 2, max: 4 },
            n_singletons: 10,
            vocabulary_size: 2000,
            pool_size: 12,
            tokens_per_report: 10,
            intra_overlap: 0.8,
            cross_overlap: 0.1,
            screenshot_reuse: 0.8,
            screenshot_coverage: 0.93,
            pattern1_pairs: 0,
            pattern2_pairs: 0,
            planted_threshold: None,
            stopword_rate: 0.15,
            synonym_rate: 0.1,
            image_width: 96,
            image_height: 160,
            embedding_dim: 100,
            embedding_seed: 0,
        }
    }
}

/// A spec file holds either one project or a list of them.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpecFile {
    Suite { projects: Vec<GeneratorSpec> },
    Single(GeneratorSpec),
}

impl SpecFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Vec<GeneratorSpec>> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: SpecFile = serde_json::from_str(&raw)
            .map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
        Ok(match file {
            SpecFile::Suite { projects } => projects,
            SpecFile::Single(spec) => vec![spec],
        })
    }
}

/// Word index ranges of a generated project.
#[derive(Debug, Clone)]
struct Vocabulary {
    pools: Vec<Vec<usize>>,
    fresh_pools: Vec<Vec<usize>>,
    noise: std::ops::Range<usize>,
}

impl GeneratorSpec {
    fn required_vocabulary(&self) -> usize {
        let needs_noise = self.intra_overlap < 1.0 || self.n_singletons > 0;
        self.pool_size * (1 + self.n_clusters + self.pattern2_pairs)
            + if needs_noise {
                self.pool_size.max(1)
            } else {
                0
            }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Spec(m));
        for (name, v) in [
            ("intra_overlap", self.intra_overlap),
            ("cross_overlap", self.cross_overlap),
            ("screenshot_reuse", self.screenshot_reuse),
            ("screenshot_coverage", self.screenshot_coverage),
            ("stopword_rate", self.stopword_rate),
            ("synonym_rate", self.synonym_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return err(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        if self.project_id.is_empty() || self.project_id.contains(['/', '\\']) {
            return err(format!("invalid project_id `{}`", self.project_id));
        }
        if self.cluster_size.min < 2 || self.cluster_size.min > self.cluster_size.max {
            return err(format!(
                "cluster_size must satisfy 2 <= min <= max, got {}..={}",
                self.cluster_size.min, self.cluster_size.max
            ));
        }
        if self.n_clusters + self.n_singletons == 0 {
            return err("spec generates no reports".into());
        }
        if self.tokens_per_report == 0 || self.pool_size == 0 {
            return err("tokens_per_report and pool_size must be positive".into());
        }
        if self.pattern1_pairs + self.pattern2_pairs > self.n_clusters {
            return err(format!(
                "{} confusable pairs need as many anchor clusters, only {} requested",
                self.pattern1_pairs + self.pattern2_pairs,
                self.n_clusters
            ));
        }
        if self.pattern2_pairs > 0 && self.pool_size < 2 {
            return err("pattern-2 confusables need pool_size >= 2".into());
        }
        let needed = self.required_vocabulary();
        if self.vocabulary_size < needed {
            return err(format!(
                "vocabulary_size {} is below the {needed} words the pools need",
                self.vocabulary_size
            ));
        }
        if self.vocabulary_size > max_vocabulary() {
            return err(format!("vocabulary_size is capped at {}", max_vocabulary()));
        }
        if let Some(p) = self.planted_threshold {
            if !(0.5..=0.97).contains(&p) {
                return err(format!("planted_threshold {p} must lie in [0.5, 0.97]"));
            }
            if self.pattern1_pairs == 0 {
                return err("planted_threshold needs at least one pattern-1 pair".into());
            }
        }
        if self.image_width < 16 || self.image_height < 16 {
            return err("images must be at least 16x16".into());
        }
        if self.embedding_dim == 0 {
            return err("embedding_dim must be positive".into());
        }
        Ok(())
    }

    fn vocabulary(&self, rng: &mut ChaCha8Rng) -> Vocabulary {
        let p = self.pool_size;
        let common: Vec<usize> = (0..p).collect();
        let n_shared = (self.cross_overlap * p as f64).round() as usize;
        let mut next = p;
        let mut take = |count: usize| {
            let r: Vec<usize> = (next..next + count).collect();
            next += count;
            r
        };
        let pools = (0..self.n_clusters)
            .map(|_| {
                let mut pool = take(p);
                let shared: Vec<usize> = common.choose_multiple(rng, n_shared).copied().collect();
                pool[..n_shared].copy_from_slice(&shared);
                pool
            })
            .collect();
        let fresh_pools = (0..self.pattern2_pairs).map(|_| take(p)).collect();
        Vocabulary {
            pools,
            fresh_pools,
            noise: next..self.vocabulary_size,
        }
    }
}

/// A planted confusion: for the query `anchor`, `confusable` is the
/// misleading non-duplicate and `duplicate` a true duplicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusablePair {
    pub anchor: String,
    pub confusable: String,
    pub duplicate: String,
}

/// A generated project with its screenshots and language resources.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub spec: GeneratorSpec,
    pub project: Project,
    /// Screenshots keyed by their path relative to the image root.
    pub images: BTreeMap<String, RasterImage>,
    pub embeddings: EmbeddingTable,
    pub stopwords: Vec<String>,
    /// Canonical word and its variant.
    pub synonyms: Vec<(String, String)>,
    pub pattern1: Vec<ConfusablePair>,
    pub pattern2: Vec<ConfusablePair>,
}

impl GeneratedCorpus {
    pub fn resources(&self) -> TextResources {
        let mut res = TextResources::new(self.embeddings.clone());
        res.stopwords = self.stopwords.iter().cloned().collect();
        res.synonyms = self
            .synonyms
            .iter()
            .map(|(c, v)| (v.clone(), c.clone()))
            .collect();
        res
    }

    /// Featurizes the project straight from the in-memory images.
    pub fn featurize(&self, resources: &TextResources) -> Result<ProjectFeatures> {
        featurize_project(&self.project, resources, |r| {
            Ok(r.screenshot.as_ref().map(|p| self.images[p].clone()))
        })
    }
}

/// Report under construction, before ids are assigned.
struct Draft {
    label: Option<usize>,
    tokens: Vec<usize>,
    image: Option<RasterImage>,
}

struct Generator<'a> {
    spec: &'a GeneratorSpec,
    rng: ChaCha8Rng,
    library: LayoutLibrary,
}

impl Generator<'_> {
    fn new_layout(&mut self) -> Result<usize> {
        self.library.add_distinct(&mut self.rng).ok_or_else(|| {
            Error::Spec(format!(
                "could not find {} mutually distinct layouts at {}x{}",
                self.library.len() + 1,
                self.spec.image_width,
                self.spec.image_height
            ))
        })
    }

    fn noise(&mut self) -> NoiseField {
        NoiseField::random(&mut self.rng, self.spec.image_width, self.spec.image_height)
    }

    /// Pool words are distinct within a report as long as the pool lasts.
    fn tokens(&mut self, pool: Option<&[usize]>, vocab: &Vocabulary) -> Vec<usize> {
        let n = self.spec.tokens_per_report;
        let from_pool = match pool {
            Some(_) => (0..n)
                .filter(|_| self.rng.gen_bool(self.spec.intra_overlap))
                .count(),
            None => 0,
        };
        let mut tokens = match pool {
            Some(pool) => self.draw_distinct(pool, from_pool),
            None => Vec::new(),
        };
        tokens.extend((from_pool..n).map(|_| self.rng.gen_range(vocab.noise.clone())));
        tokens.shuffle(&mut self.rng);
        tokens
    }

    fn draw_distinct(&mut self, pool: &[usize], count: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let take = (count - out.len()).min(pool.len());
            out.extend(pool.choose_multiple(&mut self.rng, take).copied());
        }
        out
    }

    /// Wipes `base` towards a fresh layout until the largest screenshot
    /// similarity against `targets` falls in `(lo, hi]`.
    fn morph(
        &mut self,
        base: &RasterImage,
        targets: &[Descriptors],
        lo: f64,
        hi: f64,
    ) -> Result<RasterImage> {
        const ATTEMPTS: usize = 20;
        let n = base.pixels().len();
        for _ in 0..ATTEMPTS {
            let other_id = self.new_layout()?;
            let other = self.library.render_clean(other_id);
            let noise = self.noise();
            let at = |k: usize| {
                let img = noise.apply(&layout::wipe(base, &other, k));
                let d = Descriptors::of(&img);
                let sim = targets.iter().map(|t| t.similarity(&d)).fold(0.0, f64::max);
                (img, sim)
            };
            let mid = (lo + hi) / 2.0;
            if at(n).1 > mid || at(0).1 <= mid {
                continue;
            }
            let (mut above, mut below) = (0, n);
            while below - above > 1 {
                let m = (above + below) / 2;
                if at(m).1 > mid {
                    above = m;
                } else {
                    below = m;
                }
            }
            for k in [below, above] {
                let (img, sim) = at(k);
                if sim > lo && sim <= hi {
                    return Ok(img);
                }
            }
        }
        Err(Error::Spec(format!(
            "could not morph a screenshot into the similarity window ({lo}, {hi}]"
        )))
    }

    fn surface(&mut self, tokens: &[usize], vocab: &Vocabulary) -> (String, String) {
        let mut words = Vec::with_capacity(tokens.len() * 2);
        for &t in tokens {
            if self.rng.gen_bool(self.spec.stopword_rate) {
                words.push(STOPWORDS.choose(&mut self.rng).unwrap().to_string());
            }
            let mut w = word(t);
            if t < vocab.noise.start && self.rng.gen_bool(self.spec.synonym_rate) {
                w.push(SYNONYM_SUFFIX);
            }
            words.push(w);
        }
        let split = words.len().div_ceil(2);
        let mut steps = words[..split].join(" ");
        if let Some(first) = steps.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        let mut result = words[split..].join(" ");
        result.push('.');
        (steps, result)
    }
}

/// Generates one project. Identical specs give identical output.
pub fn generate_corpus(spec: &GeneratorSpec) -> Result<GeneratedCorpus> {
    spec.validate()?;
    let mut g = Generator {
        spec,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        library: LayoutLibrary::new(spec.image_width, spec.image_height),
    };
    let vocab = spec.vocabulary(&mut g.rng);

    let cluster_layouts = (0..spec.n_clusters)
        .map(|_| g.new_layout())
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = (0..spec.n_clusters)
        .map(|_| {
            g.rng
                .gen_range(spec.cluster_size.min..=spec.cluster_size.max)
        })
        .collect();
    let mut anchors: Vec<usize> = (0..spec.n_clusters).collect();
    anchors.shuffle(&mut g.rng);
    let p1_anchors: Vec<usize> = anchors[..spec.pattern1_pairs].to_vec();
    let p2_anchors: Vec<usize> =
        anchors[spec.pattern1_pairs..spec.pattern1_pairs + spec.pattern2_pairs].to_vec();

    let mut drafts: Vec<Draft> = Vec::new();
    // draft index of each cluster's members
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(spec.n_clusters);
    for c in 0..spec.n_clusters {
        let is_anchor = p1_anchors.contains(&c) || p2_anchors.contains(&c);
        let mut ids = Vec::with_capacity(sizes[c]);
        for m in 0..sizes[c] {
            // the anchor and its first duplicate always show the cluster screen
            let forced = is_anchor && m < 2;
            let image = if forced || g.rng.gen_bool(spec.screenshot_coverage) {
                let id = if forced || g.rng.gen_bool(spec.screenshot_reuse) {
                    cluster_layouts[c]
                } else {
                    g.new_layout()?
                };
                Some(g.library.render_noisy(id, &mut g.rng))
            } else {
                None
            };
            let tokens = g.tokens(Some(&vocab.pools[c]), &vocab);
            ids.push(drafts.len());
            drafts.push(Draft {
                label: Some(c),
                tokens,
                image,
            });
        }
        members.push(ids);
    }

    for _ in 0..spec.n_singletons {
        let image = if g.rng.gen_bool(spec.screenshot_coverage) {
            let id = g.new_layout()?;
            Some(g.library.render_noisy(id, &mut g.rng))
        } else {
            None
        };
        let tokens = g.tokens(None, &vocab);
        drafts.push(Draft {
            label: None,
            tokens,
            image,
        });
    }

    // (anchor draft, confusable draft, duplicate draft)
    let mut p1_drafts = Vec::new();
    for &c in &p1_anchors {
        let anchor = members[c][0];
        let base = g.library.render_clean(cluster_layouts[c]);
        if let Some(p) = spec.planted_threshold {
            let anchor_desc = Descriptors::of(drafts[anchor].image.as_ref().unwrap());
            for &m in &members[c][1..] {
                if drafts[m].image.is_some() {
                    let img = g.morph(
                        &base,
                        std::slice::from_ref(&anchor_desc),
                        p + 0.002,
                        p + 0.008,
                    )?;
                    drafts[m].image = Some(img);
                }
            }
        }
        let mut tokens = drafts[anchor].tokens.clone();
        tokens.shuffle(&mut g.rng);
        let image = match spec.planted_threshold {
            Some(p) => {
                let targets: Vec<Descriptors> = members[c]
                    .iter()
                    .filter_map(|&m| drafts[m].image.as_ref().map(Descriptors::of))
                    .collect();
                g.morph(&base, &targets, p - 0.008, p - 0.002)?
            }
            None => {
                let id = g.new_layout()?;
                g.library.render_noisy(id, &mut g.rng)
            }
        };
        p1_drafts.push((anchor, drafts.len(), members[c][1]));
        drafts.push(Draft {
            label: None,
            tokens,
            image: Some(image),
        });
    }

    let mut p2_drafts = Vec::new();
    for (i, &c) in p2_anchors.iter().enumerate() {
        let anchor = members[c][0];
        let image = drafts[anchor].image.clone();
        let tokens = g.draw_distinct(&vocab.fresh_pools[i], spec.tokens_per_report);
        p2_drafts.push((anchor, drafts.len(), members[c][1]));
        drafts.push(Draft {
            label: None,
            tokens,
            image,
        });
    }

    // ingestion order is shuffled so duplicates are interleaved
    let mut order: Vec<usize> = (0..drafts.len()).collect();
    order.shuffle(&mut g.rng);
    let mut report_id_of = vec![String::new(); drafts.len()];
    for (pos, &d) in order.iter().enumerate() {
        report_id_of[d] = format!("{}-{:04}", spec.project_id, pos + 1);
    }

    let mut images = BTreeMap::new();
    let mut used_words = BTreeSet::new();
    let mut reports = Vec::with_capacity(drafts.len());
    for &d in &order {
        let report_id = report_id_of[d].clone();
        let (input_steps, result_description) = g.surface(&drafts[d].tokens, &vocab);
        used_words.extend(drafts[d].tokens.iter().copied());
        let screenshot = drafts[d].image.take().map(|img| {
            let path = format!("{}/{report_id}.png", spec.project_id);
            images.insert(path.clone(), img);
            path
        });
        let label = match drafts[d].label {
            Some(c) => format!("{}-B{:03}", spec.project_id, c + 1),
            None => DEFAULT_SINGLETON_LABEL.to_string(),
        };
        reports.push(Report {
            report_id,
            project_id: spec.project_id.clone(),
            environment: ENVIRONMENTS.choose(&mut g.rng).unwrap().to_string(),
            input_steps,
            result_description,
            screenshot,
            label,
            assessment: if g.rng.gen_bool(0.9) {
                Assessment::Failed
            } else {
                Assessment::Passed
            },
        });
    }

    let mut embeddings = EmbeddingTable::new(spec.embedding_dim);
    for &w in &used_words {
        let text = word(w);
        let vector = word_vector(&text, spec.embedding_dim, spec.embedding_seed);
        embeddings.insert(text, vector)?;
    }
    let synonyms = used_words
        .iter()
        .filter(|&&w| w < vocab.noise.start)
        .map(|&w| {
            let canonical = word(w);
            let variant = format!("{canonical}{SYNONYM_SUFFIX}");
            (canonical, variant)
        })
        .collect();

    let pairs = |list: Vec<(usize, usize, usize)>| {
        list.into_iter()
            .map(|(a, c, d)| ConfusablePair {
                anchor: report_id_of[a].clone(),
                confusable: report_id_of[c].clone(),
                duplicate: report_id_of[d].clone(),
            })
            .collect()
    };
    Ok(GeneratedCorpus {
        spec: spec.clone(),
        project: Project::new(spec.project_id.clone(), reports)?,
        images,
        embeddings,
        stopwords: STOPWORDS.iter().map(|s| s.to_string()).collect(),
        synonyms,
        pattern1: pairs(p1_drafts),
        pattern2: pairs(p2_drafts),
    })
}

/// Generates every project of a suite; project ids must be distinct.
pub fn generate_suite(specs: &[GeneratorSpec]) -> Result<Vec<GeneratedCorpus>> {
    let mut seen = HashSet::new();
    for s in specs {
        if !seen.insert(&s.project_id) {
            return Err(Error::Spec(format!(
                "project_id `{}` appears twice",
                s.project_id
            )));
        }
    }
    specs.iter().map(generate_corpus).collect()
}

/// File names written by [`write_corpus`] next to the manifest.
pub const MANIFEST_FILE: &str = "manifest.json";
pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const SYNONYMS_FILE: &str = "synonyms.txt";
pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const IMAGE_DIR: &str = "images";

/// Writes a suite in the on-disk corpus format: manifest, one record file per
/// project, PNG screenshots and the merged language resources. Returns the
/// manifest path.
pub fn write_corpus(dir: impl AsRef<Path>, corpora: &[GeneratedCorpus]) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let mkdir = |p: &Path| fs::create_dir_all(p).map_err(|e| Error::io(p, e));
    let write = |p: &Path, bytes: &[u8]| fs::write(p, bytes).map_err(|e| Error::io(p, e));
    mkdir(dir)?;

    let mut stopwords = BTreeSet::new();
    let mut synonyms = BTreeMap::new();
    let mut vectors: BTreeMap<&str, &[f64]> = BTreeMap::new();
    let mut dim = None;
    let mut entries = Vec::new();
    for corpus in corpora {
        let pid = &corpus.project.project_id;
        let file = format!("{pid}.jsonl");
        let mut lines = String::new();
        for r in &corpus.project.reports {
            lines.push_str(&serde_json::to_string(r).map_err(|e| Error::Spec(e.to_string()))?);
            lines.push('\n');
        }
        write(&dir.join(&file), lines.as_bytes())?;
        entries.push(ManifestEntry {
            project_id: pid.clone(),
            file: file.into(),
        });

        for (rel, img) in &corpus.images {
            let path = dir.join(IMAGE_DIR).join(rel);
            mkdir(path.parent().unwrap())?;
            write(&path, &img.to_png()?)?;
        }

        stopwords.extend(corpus.stopwords.iter().cloned());
        for (c, v) in &corpus.synonyms {
            synonyms.insert(v.clone(), c.clone());
        }
        match dim {
            None => dim = Some(corpus.embeddings.dim()),
            Some(d) if d != corpus.embeddings.dim() => {
                return Err(Error::Spec(format!(
                    "projects disagree on embedding_dim ({d} vs {})",
                    corpus.embeddings.dim()
                )))
            }
            _ => {}
        }
        for (w, v) in corpus.embeddings.iter() {
            if let Some(prev) = vectors.insert(w, v) {
                if prev != v {
                    return Err(Error::Spec(format!(
                        "word `{w}` gets different vectors in different projects; use one embedding_seed"
                    )));
                }
            }
        }
    }

    let manifest = Manifest {
        image_root: IMAGE_DIR.into(),
        projects: entries,
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Spec(e.to_string()))?;
    write(&manifest_path, json.as_bytes())?;

    let stop_text: String = stopwords.iter().map(|s| format!("{s}\n")).collect();
    write(&dir.join(STOPWORDS_FILE), stop_text.as_bytes())?;
    let mut by_canonical: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (v, c) in &synonyms {
        by_canonical.entry(c).or_default().push(v);
    }
    let syn_text: String = by_canonical
        .iter()
        .map(|(c, vs)| format!("{c}\t{}\n", vs.join("\t")))
        .collect();
    write(&dir.join(SYNONYMS_FILE), syn_text.as_bytes())?;

    let mut table = EmbeddingTable::new(dim.unwrap_or(GeneratorSpec::default().embedding_dim));
    for (w, v) in vectors {
        table.insert(w, v.to_vec())?;
    }
    table.write(dir.join(EMBEDDINGS_FILE))?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests;
