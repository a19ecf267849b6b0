//! Report text featurization: segmentation, stopword and synonym
//! normalization, TF-IDF vectors and averaged word embeddings.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

pub const DEFAULT_EMBEDDING_DIM: usize = 100;

/// Segmentation settings. Runs of CJK characters are split with forward
/// maximum matching against `dictionary`; characters not covered by a
/// dictionary word become single-character tokens.
#[derive(Debug, Clone, Default)]
pub struct SegmentationConfig {
    dictionary: HashSet<String>,
    max_word_chars: usize,
}

impl SegmentationConfig {
    pub fn with_dictionary<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let dictionary: HashSet<String> = words
            .into_iter()
            .map(Into::into)
            .filter(|w| !w.is_empty())
            .collect();
        let max_word_chars = dictionary
            .iter()
            .map(|w| w.chars().count())
            .max()
            .unwrap_or(0);
        Self {
            dictionary,
            max_word_chars,
        }
    }

    /// Reads a segmentation dictionary, one word per line.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::with_dictionary(
            raw.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from),
        ))
    }
}

pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF      // hiragana, katakana
        | 0x3400..=0x4DBF    // CJK extension A
        | 0x4E00..=0x9FFF    // CJK unified ideographs
        | 0xAC00..=0xD7AF    // hangul syllables
        | 0xF900..=0xFAFF    // compatibility ideographs
        | 0x20000..=0x2A6DF) // extension B
}

/// Splits text into raw tokens: alphanumeric runs (ASCII lowercased) and
/// segmented CJK runs. Everything else separates tokens.
pub fn tokenize(text: &str, config: &SegmentationConfig) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut cjk: Vec<char> = Vec::new();

    for c in text.chars() {
        if is_cjk(c) {
            flush_word(&mut word, &mut tokens);
            cjk.push(c);
        } else if c.is_alphanumeric() {
            flush_cjk(&mut cjk, config, &mut tokens);
            word.push(c.to_ascii_lowercase());
        } else {
            flush_word(&mut word, &mut tokens);
            flush_cjk(&mut cjk, config, &mut tokens);
        }
    }
    flush_word(&mut word, &mut tokens);
    flush_cjk(&mut cjk, config, &mut tokens);
    tokens
}

fn flush_word(word: &mut String, tokens: &mut Vec<String>) {
    if !word.is_empty() {
        tokens.push(std::mem::take(word));
    }
}

fn flush_cjk(run: &mut Vec<char>, config: &SegmentationConfig, tokens: &mut Vec<String>) {
    let mut start = 0;
    while start < run.len() {
        let longest = config.max_word_chars.min(run.len() - start);
        let mut taken = 1;
        for len in (2..=longest).rev() {
            let candidate: String = run[start..start + len].iter().collect();
            if config.dictionary.contains(&candidate) {
                taken = len;
                break;
            }
        }
        tokens.push(run[start..start + taken].iter().collect());
        start += taken;
    }
    run.clear();
}

/// Tokens after stopword removal and synonym canonicalization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenList(pub Vec<String>);

impl TokenList {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

/// Stopwords go first, then synonyms are mapped to their canonical form, then
/// stopwords are removed again in case a canonical form is one.
pub fn normalize<S: AsRef<str>>(
    tokens: &[S],
    stopwords: &HashSet<String>,
    synonyms: &HashMap<String, String>,
) -> TokenList {
    TokenList(
        tokens
            .iter()
            .map(AsRef::as_ref)
            .filter(|t| !stopwords.contains(*t))
            .map(|t| synonyms.get(t).map(String::as_str).unwrap_or(t))
            .filter(|t| !stopwords.contains(*t))
            .map(String::from)
            .collect(),
    )
}

/// Stopword file: one token per line.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

/// Synonym file: `canonical<TAB>variant<TAB>variant...` per line. Returns the
/// variant → canonical map.
pub fn load_synonyms(path: impl AsRef<Path>) -> Result<HashMap<String, String>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = HashMap::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t').map(str::trim);
        let canonical = fields.next().unwrap_or_default();
        if canonical.is_empty() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                line: idx + 1,
                message: "missing canonical form".into(),
            });
        }
        for variant in fields.filter(|v| !v.is_empty()) {
            map.insert(variant.to_string(), canonical.to_string());
        }
    }
    Ok(map)
}

/// Vocabulary and document frequencies of one document collection.
///
/// IDF is the plain ratio `N / df(t)`, no logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    document_frequency: Vec<u32>,
    n_documents: u32,
}

impl TfIdfModel {
    /// Rebuilds a model from its stored parts.
    pub fn from_parts(
        terms: Vec<String>,
        document_frequency: Vec<u32>,
        n_documents: u32,
    ) -> Result<Self> {
        if terms.len() != document_frequency.len() {
            return Err(Error::DimensionMismatch {
                left: terms.len(),
                right: document_frequency.len(),
            });
        }
        if document_frequency
            .iter()
            .any(|&df| df == 0 || df > n_documents)
        {
            return Err(Error::Validation("document frequency out of range".into()));
        }
        let index: HashMap<String, usize> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        if index.len() != terms.len() {
            return Err(Error::Validation("repeated vocabulary term".into()));
        }
        Ok(Self {
            terms,
            index,
            document_frequency,
            n_documents,
        })
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn n_documents(&self) -> u32 {
        self.n_documents
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequency(&self) -> &[u32] {
        &self.document_frequency
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.column(term).map(|c| self.idf_at(c))
    }

    pub fn idf_at(&self, column: usize) -> f64 {
        self.n_documents as f64 / self.document_frequency[column] as f64
    }
}

/// Builds a model over `documents`; columns are assigned in order of first
/// occurrence.
pub fn build_tfidf_model(documents: &[TokenList]) -> Result<TfIdfModel> {
    if documents.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let mut terms = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut document_frequency: Vec<u32> = Vec::new();
    for doc in documents {
        let mut seen = HashSet::new();
        for token in doc.iter() {
            let col = *index.entry(token.to_string()).or_insert_with(|| {
                terms.push(token.to_string());
                document_frequency.push(0);
                terms.len() - 1
            });
            if seen.insert(col) {
                document_frequency[col] += 1;
            }
        }
    }
    Ok(TfIdfModel {
        terms,
        index,
        document_frequency,
        n_documents: documents.len() as u32,
    })
}

/// Sparse TF-IDF weights sorted by column.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TfIdfVector(pub Vec<(u32, f64)>);

impl TfIdfVector {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, column: u32) -> Option<f64> {
        self.0
            .binary_search_by_key(&column, |e| e.0)
            .ok()
            .map(|i| self.0[i].1)
    }
}

/// TF is the raw occurrence count; out-of-vocabulary tokens are ignored.
pub fn tfidf_vector(tokens: &TokenList, model: &TfIdfModel) -> TfIdfVector {
    let mut counts: HashMap<usize, u32> = HashMap::new();
    for token in tokens.iter() {
        if let Some(col) = model.column(token) {
            *counts.entry(col).or_default() += 1;
        }
    }
    let mut entries: Vec<(u32, f64)> = counts
        .into_iter()
        .map(|(col, tf)| (col as u32, tf as f64 * model.idf_at(col)))
        .collect();
    entries.sort_unstable_by_key(|e| e.0);
    TfIdfVector(entries)
}

/// Word vectors of a single shared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            words: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Inserts or replaces a word vector. Returns true when a previous
    /// vector was replaced.
    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: vector.len(),
            });
        }
        let word = word.into();
        match self.index.get(&word) {
            Some(&i) => {
                self.vectors[i] = vector;
                Ok(true)
            }
            None => {
                self.index.insert(word.clone(), self.words.len());
                self.words.push(word);
                self.vectors.push(vector);
                Ok(false)
            }
        }
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vectors[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.vectors.iter().map(Vec::as_slice))
    }

    /// Text form: `word_count dim` header, then `word v1 ... vd` per line.
    /// Floats use the shortest representation that reads back exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (word, vector) in self.iter() {
            out.push_str(word);
            for v in vector {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Loads a whitespace-separated embedding file with an optional
/// `word_count dim` header line. Repeated words keep the last vector.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&raw, path)
}

pub(crate) fn parse_embeddings(raw: &str, path: &Path) -> Result<EmbeddingTable> {
    let format_err = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = raw
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    let mut declared_dim = None;
    if let Some((_, first)) = lines.peek() {
        let fields: Vec<&str> = first.split_whitespace().collect();
        if fields.len() == 2 {
            if let (Ok(_), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                declared_dim = Some(d);
                lines.next();
            }
        }
    }

    let mut table: Option<EmbeddingTable> = declared_dim.map(EmbeddingTable::new);
    for (idx, line) in lines {
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap_or_default();
        let vector = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| format_err(idx + 1, format!("non-numeric value `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if vector.is_empty() {
            return Err(format_err(idx + 1, format!("word `{word}` has no values")));
        }
        let table = table.get_or_insert_with(|| EmbeddingTable::new(vector.len()));
        if vector.len() != table.dim() {
            return Err(format_err(
                idx + 1,
                format!("expected {} values, found {}", table.dim(), vector.len()),
            ));
        }
        if table.insert(word, vector)? {
            warn!(
                "{}:{}: repeated word `{word}`, keeping the last vector",
                path.display(),
                idx + 1
            );
        }
    }
    Ok(table.unwrap_or_else(|| EmbeddingTable::new(declared_dim.unwrap_or(DEFAULT_EMBEDDING_DIM))))
}

/// Averaged word vector of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(pub Vec<f64>);

/// Mean of the in-vocabulary token vectors, counting repeats. Reports with no
/// in-vocabulary token get the zero vector.
pub fn embed_report(tokens: &TokenList, table: &EmbeddingTable) -> EmbeddingVector {
    let mut sum = vec![0.0; table.dim()];
    let mut n = 0usize;
    for vector in tokens.iter().filter_map(|t| table.get(t)) {
        sum.iter_mut().zip(vector).for_each(|(s, v)| *s += v);
        n += 1;
    }
    if n > 0 {
        sum.iter_mut().for_each(|s| *s /= n as f64);
    }
    EmbeddingVector(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> TokenList {
        TokenList(words.iter().map(|w| w.to_string()).collect())
    }

    fn set(words: &[&str]) -> HashSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn tokenize_basic() {
        let cfg = SegmentationConfig::default();
        assert_eq!(
            tokenize("Share button fails", &cfg),
            vec!["share", "button", "fails"]
        );
        assert!(tokenize("", &cfg).is_empty());
        assert!(tokenize("  ,.!? ", &cfg).is_empty());
    }

    #[test]
    fn tokenize_mixed_script() {
        // alnum run "App" -> "app"; CJK run 崩溃了 -> three single characters;
        // comma separates; "click" then CJK run 分享 -> two characters;
        // "v2" stays one token because digits are alphanumeric.
        let cfg = SegmentationConfig::default();
        assert_eq!(
            tokenize("App崩溃了, click分享 v2", &cfg),
            vec!["app", "崩", "溃", "了", "click", "分", "享", "v2"]
        );
        let dict = SegmentationConfig::with_dictionary(["崩溃", "分享", "崩溃了吗"]);
        assert_eq!(
            tokenize("App崩溃了, click分享 v2", &dict),
            vec!["app", "崩溃", "了", "click", "分享", "v2"]
        );
        // non-ASCII letters are kept as-is
        assert_eq!(tokenize("Ärger ÉCRAN", &cfg), vec!["Ärger", "Écran"]);
    }

    #[test]
    fn normalize_pipeline() {
        let none = HashMap::new();
        assert_eq!(
            normalize(&["the", "share", "button"], &set(&["the"]), &none),
            toks(&["share", "button"])
        );
        let syn: HashMap<String, String> = [("btn".to_string(), "button".to_string())].into();
        assert_eq!(
            normalize(&["btn"], &HashSet::new(), &syn),
            toks(&["button"])
        );
        assert_eq!(
            normalize(&["the", "btn", "fails"], &set(&["the"]), &syn),
            toks(&["button", "fails"])
        );
        // canonical form that is itself a stopword disappears
        let to_stop: HashMap<String, String> = [("teh".to_string(), "the".to_string())].into();
        assert_eq!(
            normalize(&["teh", "x"], &set(&["the"]), &to_stop),
            toks(&["x"])
        );
    }

    #[test]
    fn idf_is_plain_ratio() {
        let docs = [toks(&["button", "a"]), toks(&["button"])];
        let model = build_tfidf_model(&docs).unwrap();
        assert_eq!(model.idf("button"), Some(1.0));

        let docs = [toks(&["crash"]), toks(&["x"]), toks(&["y"]), toks(&["z"])];
        assert_eq!(build_tfidf_model(&docs).unwrap().idf("crash"), Some(4.0));
        assert!(matches!(
            build_tfidf_model(&[]),
            Err(Error::EmptyCollection)
        ));
    }

    #[test]
    fn idf_table_matches_counting() {
        let docs = [
            toks(&["share", "button", "share"]),
            toks(&["button", "crash"]),
            toks(&["login", "crash", "crash", "share"]),
        ];
        let model = build_tfidf_model(&docs).unwrap();
        let mut df: HashMap<&str, u32> = HashMap::new();
        for doc in &docs {
            for t in doc.iter().collect::<HashSet<_>>() {
                *df.entry(t).or_default() += 1;
            }
        }
        assert_eq!(model.vocabulary_size(), df.len());
        for (term, count) in &df {
            assert_eq!(model.idf(term).unwrap(), 3.0 / *count as f64);
        }
        assert_eq!(model.column("share"), Some(0));
        assert_eq!(model.column("login"), Some(3));

        // third document: share tf 1 idf 3/2, crash tf 2 idf 3/2, login tf 1 idf 3
        let v = tfidf_vector(&docs[2], &model);
        assert_eq!(v.get(model.column("share").unwrap() as u32), Some(1.5));
        assert_eq!(v.get(model.column("crash").unwrap() as u32), Some(3.0));
        assert_eq!(v.get(model.column("login").unwrap() as u32), Some(3.0));
        assert_eq!(v.get(model.column("button").unwrap() as u32), None);
    }

    #[test]
    fn tfidf_counts_repeats_and_skips_oov() {
        let docs = [toks(&["button"]), toks(&["other"])];
        let model = build_tfidf_model(&docs).unwrap();
        let v = tfidf_vector(&toks(&["button", "button", "unseen"]), &model);
        assert_eq!(v.0, vec![(0, 4.0)]);
        assert!(tfidf_vector(&TokenList::default(), &model).is_empty());
    }

    #[test]
    fn embeddings_parse_and_validate() {
        let table = parse_embeddings("a 1 0 0\nb 0 1 0\n", Path::new("e.txt")).unwrap();
        assert_eq!((table.len(), table.dim()), (2, 3));

        let with_header = parse_embeddings("2 3\na 1 0 0\nb 0 1 0\n", Path::new("e.txt")).unwrap();
        assert_eq!(with_header, table);

        let short = format!(
            "a {}\nb {}\n",
            vec!["0.5"; 100].join(" "),
            vec!["0.5"; 99].join(" ")
        );
        assert!(matches!(
            parse_embeddings(&short, Path::new("e.txt")),
            Err(Error::Format { line: 2, .. })
        ));
        assert!(matches!(
            parse_embeddings("2 3\na 1 0\n", Path::new("e.txt")),
            Err(Error::Format { line: 2, .. })
        ));
        assert!(matches!(
            parse_embeddings("a 1 x 0\n", Path::new("e.txt")),
            Err(Error::Format { .. })
        ));

        let repeated = parse_embeddings("a 1 0\na 0 1\n", Path::new("e.txt")).unwrap();
        assert_eq!(repeated.get("a"), Some(&[0.0, 1.0][..]));
    }

    #[test]
    fn embeddings_round_trip_through_file() {
        let mut table = EmbeddingTable::new(3);
        table
            .insert("alpha", vec![0.1, -2.5e-7, 1.0 / 3.0])
            .unwrap();
        table.insert("分享", vec![1e10, 0.0, -0.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        table.write(&path).unwrap();
        assert_eq!(load_embeddings(&path).unwrap(), table);
    }

    #[test]
    fn embedding_average() {
        let mut table = EmbeddingTable::new(2);
        table.insert("a", vec![1.0, 0.0]).unwrap();
        table.insert("b", vec![0.0, 1.0]).unwrap();
        assert_eq!(embed_report(&toks(&["a"]), &table).0, vec![1.0, 0.0]);
        assert_eq!(embed_report(&toks(&["a", "b"]), &table).0, vec![0.5, 0.5]);
        assert_eq!(
            embed_report(&toks(&["a", "zz", "b"]), &table).0,
            vec![0.5, 0.5]
        );
        assert_eq!(embed_report(&toks(&["zz"]), &table).0, vec![0.0, 0.0]);
        assert_eq!(
            embed_report(&toks(&["a", "a", "b"]), &table).0,
            vec![2.0 / 3.0, 1.0 / 3.0]
        );
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "b", "c", "d", "e", "the", "btn"]).prop_map(String::from)
    }

    proptest! {
        #[test]
        fn tfidf_properties(docs in prop::collection::vec(prop::collection::vec(word(), 0..8), 1..6)) {
            let docs: Vec<TokenList> = docs.into_iter().map(TokenList).collect();
            let model = build_tfidf_model(&docs).unwrap();
            for (col, term) in model.terms().iter().enumerate() {
                let idf = model.idf_at(col);
                prop_assert!(idf >= 1.0);
                let everywhere = docs.iter().all(|d| d.iter().any(|t| t == term));
                prop_assert_eq!(idf == 1.0, everywhere);
            }
            for doc in &docs {
                let v = tfidf_vector(doc, &model);
                prop_assert!(v.0.iter().all(|(c, w)| *w > 0.0 && (*c as usize) < model.vocabulary_size()));
                let doubled = TokenList(doc.0.iter().chain(doc.0.iter()).cloned().collect());
                let v2 = tfidf_vector(&doubled, &model);
                prop_assert_eq!(v.0.len(), v2.0.len());
                for ((c1, w1), (c2, w2)) in v.0.iter().zip(&v2.0) {
                    prop_assert_eq!(c1, c2);
                    prop_assert_eq!(2.0 * w1, *w2);
                }
            }
        }

        #[test]
        fn normalize_is_idempotent(tokens in prop::collection::vec(word(), 0..12)) {
            let stop = set(&["the"]);
            let syn: HashMap<String, String> = [("btn".to_string(), "b".to_string()), ("e".to_string(), "the".to_string())].into();
            let once = normalize(&tokens, &stop, &syn);
            prop_assert!(once.iter().all(|t| !stop.contains(t) && !syn.contains_key(t)));
            prop_assert_eq!(normalize(&once.0, &stop, &syn), once);
        }

        #[test]
        fn embedding_is_permutation_invariant(tokens in prop::collection::vec(word(), 0..12), rot in 0usize..12) {
            let mut table = EmbeddingTable::new(3);
            for (i, w) in ["a", "b", "c", "d"].iter().enumerate() {
                table.insert(*w, vec![i as f64, 1.0 / (i as f64 + 1.0), -(i as f64)]).unwrap();
            }
            let mut rotated = tokens.clone();
            if !rotated.is_empty() {
                let k = rot % rotated.len();
                rotated.rotate_left(k);
            }
            rotated.reverse();
            let a = embed_report(&TokenList(tokens), &table);
            let b = embed_report(&TokenList(rotated), &table);
            for (x, y) in a.0.iter().zip(&b.0) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
