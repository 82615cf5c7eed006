//! Word-vector store and the default observation featurizers.
//!
//! Observations are fixed-length `f64` vectors made of named, contiguous
//! segments. A featurizer's [`Layout`] depends only on its configuration,
//! never on the text being featurized.

use std::borrow::Cow;
use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::datasets::tokenize;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Ordered, contiguous segments of a feature vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout(Arc<[Segment]>);

impl Layout {
    pub fn new(segments: &[(&str, usize)]) -> Self {
        let mut offset = 0;
        let segs: Vec<Segment> = segments
            .iter()
            .map(|&(name, len)| {
                let s = Segment {
                    name: name.to_string(),
                    offset,
                    len,
                };
                offset += len;
                s
            })
            .collect();
        Self(segs.into())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    pub fn total_len(&self) -> usize {
        self.0.last().map_or(0, |s| s.offset + s.len)
    }

    /// All-zero vector of this layout.
    pub fn zeros(&self) -> FeatureVector {
        FeatureVector {
            values: vec![0.0; self.total_len()],
            layout: self.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: Layout,
}

impl FeatureVector {
    pub fn segment(&self, name: &str) -> Option<&[f64]> {
        self.layout
            .segments()
            .iter()
            .find(|s| s.name == name)
            .map(|s| &self.values[s.offset..s.offset + s.len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// What to return for tokens missing from the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    #[default]
    Zeros,
    /// A deterministic unit vector derived from the token and this seed.
    HashBucket { seed: u64 },
}

/// Immutable token → vector table.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<f64>,
    oov: OovPolicy,
}

impl EmbeddingStore {
    pub fn new(dim: usize, oov: OovPolicy) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            rows: Vec::new(),
            oov,
        }
    }

    /// Table-free store where every token hashes to its own unit vector.
    pub fn hashed(dim: usize, seed: u64) -> Self {
        Self::new(dim, OovPolicy::HashBucket { seed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn oov_policy(&self) -> OovPolicy {
        self.oov
    }

    pub fn with_oov_policy(mut self, oov: OovPolicy) -> Self {
        self.oov = oov;
        self
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Adds a vector; the first insertion of a token wins.
    pub fn insert(&mut self, token: impl Into<String>, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        let token = token.into();
        if self.index.contains_key(&token) {
            return Ok(false);
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.rows.extend_from_slice(vector);
        Ok(true)
    }

    /// Parses whitespace-separated text vectors (`token v1 .. vd` per line),
    /// with an optional leading `count dim` header.
    pub fn load<R: BufRead>(reader: R, oov: OovPolicy) -> Result<Self> {
        let mut store: Option<EmbeddingStore> = None;
        let mut header_dim = None;
        let mut first = true;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if first {
                first = false;
                if let [count, dim] = fields[..] {
                    if let (Ok(_), Ok(dim)) = (count.parse::<usize>(), dim.parse::<usize>()) {
                        if dim == 0 {
                            return Err(Error::Parse {
                                line: lineno,
                                msg: "header declares dimension 0".into(),
                            });
                        }
                        header_dim = Some(dim);
                        continue;
                    }
                }
            }
            let (token, values) = fields.split_first().unwrap();
            if values.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("token `{token}` has no vector"),
                });
            }
            let vector = values
                .iter()
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("cannot parse `{v}` as a number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let expected = store.as_ref().map(|s| s.dim).or(header_dim);
            if let Some(expected) = expected {
                if expected != vector.len() {
                    return Err(Error::EmbeddingDimension {
                        line: lineno,
                        expected,
                        found: vector.len(),
                    });
                }
            }
            store
                .get_or_insert_with(|| EmbeddingStore::new(vector.len(), oov))
                .insert(*token, &vector)?;
        }
        match (store, header_dim) {
            (Some(s), _) => Ok(s),
            (None, Some(dim)) => Ok(EmbeddingStore::new(dim, oov)),
            (None, None) => Err(Error::Parse {
                line: 0,
                msg: "embedding file contains no vectors".into(),
            }),
        }
    }

    /// Writes the table in the format accepted by [`EmbeddingStore::load`], with a header.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.tokens.len(), self.dim)?;
        for (i, token) in self.tokens.iter().enumerate() {
            write!(out, "{token}")?;
            for v in &self.rows[i * self.dim..(i + 1) * self.dim] {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    fn row(&self, ix: usize) -> &[f64] {
        &self.rows[ix * self.dim..(ix + 1) * self.dim]
    }

    /// (token, vector) pairs in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tokens.iter().enumerate().map(|(i, t)| (t.as_str(), self.row(i)))
    }

    /// Vector for `token`: exact hit, then lowercase hit, then the OOV policy.
    pub fn embed_token(&self, token: &str) -> Cow<'_, [f64]> {
        if let Some(&ix) = self.index.get(token) {
            return Cow::Borrowed(self.row(ix));
        }
        let lower = token.to_lowercase();
        if let Some(&ix) = self.index.get(&lower) {
            return Cow::Borrowed(self.row(ix));
        }
        match self.oov {
            OovPolicy::Zeros => Cow::Owned(vec![0.0; self.dim]),
            OovPolicy::HashBucket { seed } => Cow::Owned(hash_vector(token, self.dim, seed)),
        }
    }

    /// Arithmetic mean of the token vectors; zeros for no tokens.
    pub fn pool_sentence<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        if tokens.is_empty() {
            return acc;
        }
        for t in tokens {
            for (a, v) in acc.iter_mut().zip(self.embed_token(t.as_ref()).iter()) {
                *a += v;
            }
        }
        let n = tokens.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Deterministic, platform-independent unit vector for a token.
pub fn hash_vector(token: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(token.as_bytes()) ^ seed.rotate_left(17));
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Cosine similarity, defined as 0.0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Label vocabulary with O(1) index lookups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVocab {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelVocab {
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Self {
        let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Self { labels, index }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn write_one_hot(&self, label: Option<&str>, out: &mut [f64]) -> Result<()> {
        let ix = match label {
            Some(l) => self.position(l)?,
            None => self.labels.len(),
        };
        out.fill(0.0);
        out[ix] = 1.0;
        Ok(())
    }

    fn write_bow<S: AsRef<str>>(&self, labels: &[S], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        for l in labels {
            out[self.position(l.as_ref())?] = 1.0;
        }
        Ok(())
    }
}

/// One-hot over `vocab` plus a final slot for the start-of-sequence sentinel
/// (`None`), so "no previous label" differs from every real label.
pub fn one_hot<S: AsRef<str>>(vocab: &[S], label: Option<&str>) -> Result<Vec<f64>> {
    let mut out = vec![0.0; vocab.len() + 1];
    LabelVocab::new(vocab).write_one_hot(label, &mut out)?;
    Ok(out)
}

/// Presence indicator over `vocab`.
pub fn bow_labels<S: AsRef<str>, L: AsRef<str>>(vocab: &[S], labels: &[L]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; vocab.len()];
    LabelVocab::new(vocab).write_bow(labels, &mut out)?;
    Ok(out)
}

pub fn seqtag_layout(dim: usize, n_labels: usize) -> Layout {
    Layout::new(&[("word", dim), ("prev_label", n_labels + 1)])
}

pub fn mlc_layout(dim: usize, n_labels: usize) -> Layout {
    Layout::new(&[("sentence", dim), ("labels", n_labels)])
}

pub fn qa_simple_layout(dim: usize) -> Layout {
    Layout::new(&[("question", dim), ("choice", dim), ("facts", dim)])
}

pub fn qa_informed_layout() -> Layout {
    Layout::new(&[("cos_question", 1), ("cos_facts", 1)])
}

/// `[word vector][one-hot of the previous label]`.
pub fn featurize_seqtag<S: AsRef<str>>(
    store: &EmbeddingStore,
    vocab: &[S],
    current_word: &str,
    prev_label: Option<&str>,
) -> Result<FeatureVector> {
    let mut values = store.embed_token(current_word).into_owned();
    values.extend(one_hot(vocab, prev_label)?);
    Ok(FeatureVector {
        values,
        layout: seqtag_layout(store.dim(), vocab.len()),
    })
}

/// `[mean-pooled sentence][bag of labels emitted so far]`.
pub fn featurize_mlc<S: AsRef<str>, L: AsRef<str>>(
    store: &EmbeddingStore,
    vocab: &[S],
    sentence: &str,
    labels_so_far: &[L],
) -> Result<FeatureVector> {
    let mut values = store.pool_sentence(&tokenize(sentence));
    values.extend(bow_labels(vocab, labels_so_far)?);
    Ok(FeatureVector {
        values,
        layout: mlc_layout(store.dim(), vocab.len()),
    })
}

fn pool_facts(store: &EmbeddingStore, facts: &[String]) -> Vec<f64> {
    let tokens: Vec<String> = facts.iter().flat_map(|f| tokenize(f)).collect();
    store.pool_sentence(&tokens)
}

/// `[question][choice][facts]`, each mean-pooled; facts are pooled as one text.
pub fn featurize_qa_simple(
    store: &EmbeddingStore,
    question: &str,
    choice: &str,
    facts: &[String],
) -> FeatureVector {
    let mut values = store.pool_sentence(&tokenize(question));
    values.extend(store.pool_sentence(&tokenize(choice)));
    values.extend(pool_facts(store, facts));
    FeatureVector {
        values,
        layout: qa_simple_layout(store.dim()),
    }
}

/// `[cos(choice, question), cos(choice, facts)]`.
pub fn featurize_qa_informed(
    store: &EmbeddingStore,
    question: &str,
    choice: &str,
    facts: &[String],
) -> FeatureVector {
    let q = store.pool_sentence(&tokenize(question));
    let c = store.pool_sentence(&tokenize(choice));
    let f = pool_facts(store, facts);
    FeatureVector {
        values: vec![cosine(&c, &q), cosine(&c, &f)],
        layout: qa_informed_layout(),
    }
}

/// Observation featurizer for sequence tagging.
pub trait SeqTagFeaturizer: Send {
    /// Called on every reset with the episode's tokens.
    fn init_on_reset(&mut self, tokens: &[String]);
    /// Features for the token at `position` given the previously predicted label.
    fn featurize(&self, position: usize, prev_label: Option<&str>) -> Result<FeatureVector>;
    fn layout(&self) -> &Layout;
}

/// Observation featurizer for multi-label classification.
pub trait MlcFeaturizer: Send {
    fn init_on_reset(&mut self, sentence: &str);
    fn featurize(&self, labels_so_far: &[String]) -> Result<FeatureVector>;
    fn layout(&self) -> &Layout;
}

/// Observation featurizer for multiple-choice QA.
pub trait QaFeaturizer: Send {
    fn init_on_reset(&mut self, question: &str, facts: &[String]);
    fn featurize(&self, choice: &str) -> FeatureVector;
    fn layout(&self) -> &Layout;
}

/// Word embedding concatenated with the previous label's one-hot.
pub struct DefaultSeqTagFeaturizer {
    store: Arc<EmbeddingStore>,
    vocab: LabelVocab,
    layout: Layout,
    word_vectors: Vec<Vec<f64>>,
}

impl DefaultSeqTagFeaturizer {
    pub fn new<S: AsRef<str>>(store: Arc<EmbeddingStore>, labels: &[S]) -> Self {
        Self {
            layout: seqtag_layout(store.dim(), labels.len()),
            vocab: LabelVocab::new(labels),
            store,
            word_vectors: Vec::new(),
        }
    }
}

impl SeqTagFeaturizer for DefaultSeqTagFeaturizer {
    fn init_on_reset(&mut self, tokens: &[String]) {
        self.word_vectors = tokens
            .iter()
            .map(|t| self.store.embed_token(t).into_owned())
            .collect();
    }

    fn featurize(&self, position: usize, prev_label: Option<&str>) -> Result<FeatureVector> {
        let word = self.word_vectors.get(position).ok_or(Error::DimensionMismatch {
            expected: self.word_vectors.len(),
            found: position,
        })?;
        let mut values = vec![0.0; self.layout.total_len()];
        let d = self.store.dim();
        values[..d].copy_from_slice(word);
        self.vocab.write_one_hot(prev_label, &mut values[d..])?;
        Ok(FeatureVector {
            values,
            layout: self.layout.clone(),
        })
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }
}

/// Mean-pooled sentence concatenated with a bag of emitted labels.
pub struct DefaultMlcFeaturizer {
    store: Arc<EmbeddingStore>,
    vocab: LabelVocab,
    layout: Layout,
    pooled: Vec<f64>,
}

impl DefaultMlcFeaturizer {
    pub fn new<S: AsRef<str>>(store: Arc<EmbeddingStore>, labels: &[S]) -> Self {
        Self {
            layout: mlc_layout(store.dim(), labels.len()),
            vocab: LabelVocab::new(labels),
            pooled: vec![0.0; store.dim()],
            store,
        }
    }
}

impl MlcFeaturizer for DefaultMlcFeaturizer {
    fn init_on_reset(&mut self, sentence: &str) {
        self.pooled = self.store.pool_sentence(&tokenize(sentence));
    }

    fn featurize(&self, labels_so_far: &[String]) -> Result<FeatureVector> {
        let mut values = vec![0.0; self.layout.total_len()];
        let d = self.store.dim();
        values[..d].copy_from_slice(&self.pooled);
        self.vocab.write_bow(labels_so_far, &mut values[d..])?;
        Ok(FeatureVector {
            values,
            layout: self.layout.clone(),
        })
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }
}

/// Concatenated question, choice and facts representations.
pub struct SimpleQaFeaturizer {
    store: Arc<EmbeddingStore>,
    layout: Layout,
    question: Vec<f64>,
    facts: Vec<f64>,
}

impl SimpleQaFeaturizer {
    pub fn new(store: Arc<EmbeddingStore>) -> Self {
        let d = store.dim();
        Self {
            layout: qa_simple_layout(d),
            store,
            question: vec![0.0; d],
            facts: vec![0.0; d],
        }
    }
}

impl QaFeaturizer for SimpleQaFeaturizer {
    fn init_on_reset(&mut self, question: &str, facts: &[String]) {
        self.question = self.store.pool_sentence(&tokenize(question));
        self.facts = pool_facts(&self.store, facts);
    }

    fn featurize(&self, choice: &str) -> FeatureVector {
        let mut values = Vec::with_capacity(self.layout.total_len());
        values.extend_from_slice(&self.question);
        values.extend(self.store.pool_sentence(&tokenize(choice)));
        values.extend_from_slice(&self.facts);
        FeatureVector {
            values,
            layout: self.layout.clone(),
        }
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }
}

/// Cosine similarities of the choice to the question and to the facts.
pub struct InformedQaFeaturizer {
    store: Arc<EmbeddingStore>,
    layout: Layout,
    question: Vec<f64>,
    facts: Vec<f64>,
}

impl InformedQaFeaturizer {
    pub fn new(store: Arc<EmbeddingStore>) -> Self {
        let d = store.dim();
        Self {
            layout: qa_informed_layout(),
            store,
            question: vec![0.0; d],
            facts: vec![0.0; d],
        }
    }
}

impl QaFeaturizer for InformedQaFeaturizer {
    fn init_on_reset(&mut self, question: &str, facts: &[String]) {
        self.question = self.store.pool_sentence(&tokenize(question));
        self.facts = pool_facts(&self.store, facts);
    }

    fn featurize(&self, choice: &str) -> FeatureVector {
        let c = self.store.pool_sentence(&tokenize(choice));
        FeatureVector {
            values: vec![cosine(&c, &self.question), cosine(&c, &self.facts)],
            layout: self.layout.clone(),
        }
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> EmbeddingStore {
        EmbeddingStore::load("the 0.1 0.2\ncat 0.3 0.4\n".as_bytes(), OovPolicy::Zeros).unwrap()
    }

    #[test]
    fn load_plain_and_header() {
        let s = toy();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.len(), 2);
        assert_eq!(&*s.embed_token("cat"), &[0.3, 0.4]);
        let h = EmbeddingStore::load("2 2\nthe 0.1 0.2\ncat 0.3 0.4\n".as_bytes(), OovPolicy::Zeros)
            .unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(&*h.embed_token("the"), &*s.embed_token("the"));
        assert_eq!(&*h.embed_token("cat"), &*s.embed_token("cat"));
    }

    #[test]
    fn load_errors_carry_line_numbers() {
        let err = EmbeddingStore::load("a 1 2\nb 1 2 3\n".as_bytes(), OovPolicy::Zeros).unwrap_err();
        assert!(matches!(
            err,
            Error::EmbeddingDimension { line: 2, expected: 2, found: 3 }
        ));
        let err = EmbeddingStore::load("a 1 2\nb 1 x\n".as_bytes(), OovPolicy::Zeros).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = EmbeddingStore::load("3 4\na 1 2\n".as_bytes(), OovPolicy::Zeros).unwrap_err();
        assert!(matches!(err, Error::EmbeddingDimension { line: 2, .. }));
    }

    #[test]
    fn duplicates_keep_first() {
        let s = EmbeddingStore::load("a 1 2\na 3 4\n".as_bytes(), OovPolicy::Zeros).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(&*s.embed_token("a"), &[1.0, 2.0]);
    }

    #[test]
    fn write_then_load_is_identity() {
        let s = EmbeddingStore::load("x 0.1 -2.5e-7\ny 3 4\n".as_bytes(), OovPolicy::Zeros).unwrap();
        let mut buf = Vec::new();
        s.write(&mut buf).unwrap();
        let t = EmbeddingStore::load(buf.as_slice(), OovPolicy::Zeros).unwrap();
        assert_eq!(t.rows, s.rows);
        assert_eq!(t.tokens, s.tokens);
    }

    #[test]
    fn oov_policies() {
        let s = toy();
        assert_eq!(&*s.embed_token("dog"), &[0.0, 0.0]);
        assert_eq!(&*s.embed_token("CAT"), &[0.3, 0.4]);
        let h = toy().with_oov_policy(OovPolicy::HashBucket { seed: 3 });
        let a = h.embed_token("dog").into_owned();
        assert_eq!(a, h.embed_token("dog").into_owned());
        assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        assert_ne!(a, h.embed_token("cow").into_owned());
    }

    #[test]
    fn pooling() {
        let s = toy();
        assert_eq!(s.pool_sentence(&["cat"]), vec![0.3, 0.4]);
        let p = s.pool_sentence(&["the", "cat"]);
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[1] - 0.3).abs() < 1e-15);
        assert_eq!(s.pool_sentence::<&str>(&[]), vec![0.0, 0.0]);
    }

    #[test]
    fn one_hot_and_bow() {
        let vocab = ["PER", "LOC", "O"];
        assert_eq!(one_hot(&vocab, Some("LOC")).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(one_hot(&vocab, None).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(one_hot(&vocab, Some("MISC")), Err(Error::UnknownLabel(_))));
        let v = ["a", "b", "c"];
        assert_eq!(bow_labels(&v, &["c", "a"]).unwrap(), vec![1.0, 0.0, 1.0]);
        assert_eq!(bow_labels::<_, &str>(&v, &[]).unwrap(), vec![0.0; 3]);
        assert_eq!(bow_labels(&v, &["a", "a"]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert!(bow_labels(&v, &["z"]).is_err());
    }

    #[test]
    fn seqtag_features() {
        let store = EmbeddingStore::load("w 1 2 3\n".as_bytes(), OovPolicy::Zeros).unwrap();
        let vocab = ["A", "B"];
        let fv = featurize_seqtag(&store, &vocab, "w", None).unwrap();
        assert_eq!(fv.len(), 6);
        let segs: Vec<_> = fv
            .layout
            .segments()
            .iter()
            .map(|s| (s.name.as_str(), s.offset, s.len))
            .collect();
        assert_eq!(segs, vec![("word", 0, 3), ("prev_label", 3, 3)]);
        assert_eq!(fv.segment("prev_label").unwrap(), &[0.0, 0.0, 1.0]);
        assert_eq!(fv, featurize_seqtag(&store, &vocab, "w", None).unwrap());

        let mut f = DefaultSeqTagFeaturizer::new(Arc::new(store.clone()), &vocab);
        f.init_on_reset(&["w".to_string(), "v".to_string()]);
        assert_eq!(f.featurize(0, None).unwrap(), fv);
        assert_eq!(
            f.featurize(1, Some("B")).unwrap(),
            featurize_seqtag(&store, &vocab, "v", Some("B")).unwrap()
        );
    }

    #[test]
    fn mlc_features() {
        let store = toy();
        let vocab = ["x", "y", "z"];
        let fv = featurize_mlc::<_, &str>(&store, &vocab, "The cat", &[]).unwrap();
        assert_eq!(fv.len(), 5);
        assert_eq!(fv.segment("labels").unwrap(), &[0.0; 3]);
        let fv2 = featurize_mlc(&store, &vocab, "The cat", &["z"]).unwrap();
        assert_eq!(fv2.segment("labels").unwrap(), &[0.0, 0.0, 1.0]);
        assert_eq!(fv2, featurize_mlc(&store, &vocab, "The cat", &["z"]).unwrap());

        let mut f = DefaultMlcFeaturizer::new(Arc::new(store.clone()), &vocab);
        f.init_on_reset("The cat");
        assert_eq!(f.featurize(&["z".to_string()]).unwrap(), fv2);
    }

    #[test]
    fn qa_simple_features() {
        let store = toy();
        let fv = featurize_qa_simple(&store, "the cat", "cat", &[]);
        assert_eq!(fv.len(), 6);
        assert_eq!(fv.segment("facts").unwrap(), &[0.0, 0.0]);
        assert_eq!(fv, featurize_qa_simple(&store, "the cat", "cat", &[]));
        let facts = vec!["the".to_string(), "cat cat".to_string()];
        let mut f = SimpleQaFeaturizer::new(Arc::new(store.clone()));
        f.init_on_reset("the cat", &facts);
        assert_eq!(f.featurize("cat"), featurize_qa_simple(&store, "the cat", "cat", &facts));
    }

    #[test]
    fn qa_informed_features() {
        let store =
            EmbeddingStore::load("q 1 0\nc 0 1\nd 2 0\n".as_bytes(), OovPolicy::Zeros).unwrap();
        let same = featurize_qa_informed(&store, "q", "d", &[]);
        assert_eq!(same.len(), 2);
        assert!((same.values[0] - 1.0).abs() < 1e-15);
        assert_eq!(same.values[1], 0.0);
        assert_eq!(featurize_qa_informed(&store, "q", "c", &[]).values[0], 0.0);
        let facts = vec!["q".to_string()];
        assert_eq!(featurize_qa_informed(&store, "q", "unknown", &facts).values, vec![0.0, 0.0]);
        let mut f = InformedQaFeaturizer::new(Arc::new(store.clone()));
        f.init_on_reset("q", &facts);
        assert_eq!(f.featurize("d"), featurize_qa_informed(&store, "q", "d", &facts));
    }

    proptest! {
        #[test]
        fn cosine_bounded_and_scale_invariant(
            a in proptest::collection::vec(-5.0f64..5.0, 4),
            b in proptest::collection::vec(-5.0f64..5.0, 4),
            scale in 0.01f64..100.0,
        ) {
            let c = cosine(&a, &b);
            prop_assert!((-1.0..=1.0).contains(&c));
            let scaled: Vec<f64> = a.iter().map(|x| x * scale).collect();
            prop_assert!((cosine(&scaled, &b) - c).abs() < 1e-9);
        }

        #[test]
        fn layout_length_independent_of_content(words in proptest::collection::vec("[a-z]{1,5}", 0..6)) {
            let store = EmbeddingStore::hashed(8, 1);
            let sentence = words.join(" ");
            let fv = featurize_mlc::<_, &str>(&store, &["a", "b"], &sentence, &[]).unwrap();
            prop_assert_eq!(fv.len(), 10);
            let q = featurize_qa_simple(&store, &sentence, &sentence, &words);
            prop_assert_eq!(q.len(), 24);
            let mut offset = 0;
            for s in q.layout.segments() {
                prop_assert_eq!(s.offset, offset);
                offset += s.len;
            }
        }
    }
}
