//! Seeded toy corpora that an exact rule solves, plus matching embeddings.
//!
//! * seqtag: word `tok{i}` always carries tag `TAG{i % n_labels}`.
//! * mlc: each label owns a keyword set; a sentence contains keywords of
//!   exactly its labels, mixed with label-neutral filler words.
//! * qa: one topic vocabulary per choice slot; the correct choice is the only
//!   one whose tokens occur in the question and facts.
//!
//! Embeddings are clustered: words that share a tag, label or topic sit near a
//! common random direction. Filler words get short vectors.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AnyCorpus, Corpus, CorpusSplit, SplitName};
use crate::env::Task;
use crate::error::{Error, Result};
use crate::featurize::{EmbeddingStore, OovPolicy};
use crate::sample::{InputText, QaSample, Sample};

const NEUTRAL_WORDS: [&str; 8] = ["what", "which", "is", "the", "of", "a", "can", "do"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub task: Task,
    /// Words in total (seqtag), filler words (mlc) or words per topic (qa).
    pub vocab_size: usize,
    /// Tags (seqtag), labels (mlc) or topics, one per choice (qa).
    pub n_labels: usize,
    /// Keywords owned by each label (mlc only).
    pub keywords_per_label: usize,
    /// Shared tokens between the correct choice and the question (qa only).
    pub overlap_k: usize,
    pub train: usize,
    pub dev: usize,
    pub test: usize,
    pub embedding_dim: usize,
    /// Multiplies every generated vector.
    pub embedding_scale: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn seqtag() -> Self {
        Self {
            task: Task::SeqTag,
            vocab_size: 100,
            n_labels: 3,
            keywords_per_label: 0,
            overlap_k: 0,
            train: 500,
            dev: 100,
            test: 100,
            embedding_dim: 32,
            embedding_scale: 1.0,
            seed: 7,
        }
    }

    pub fn mlc() -> Self {
        Self {
            task: Task::Mlc,
            vocab_size: 40,
            n_labels: 6,
            keywords_per_label: 3,
            ..Self::seqtag()
        }
    }

    pub fn qa() -> Self {
        Self {
            task: Task::Qa,
            vocab_size: 12,
            n_labels: 8,
            overlap_k: 2,
            embedding_scale: 10.0,
            ..Self::seqtag()
        }
    }

    pub fn for_task(task: Task) -> Self {
        match task {
            Task::SeqTag => Self::seqtag(),
            Task::Mlc => Self::mlc(),
            Task::Qa => Self::qa(),
        }
    }

    fn count(&self, split: SplitName) -> usize {
        match split {
            SplitName::Train => self.train,
            SplitName::Dev => self.dev,
            SplitName::Test => self.test,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Spec(m.to_string()));
        if self.embedding_dim == 0 {
            return fail("embedding_dim must be positive");
        }
        if !(self.embedding_scale.is_finite() && self.embedding_scale > 0.0) {
            return fail("embedding_scale must be positive");
        }
        if self.n_labels == 0 {
            return fail("n_labels must be positive");
        }
        match self.task {
            Task::SeqTag if self.n_labels > self.vocab_size => {
                fail("more tags than words: every tag needs its own sub-vocabulary")
            }
            Task::Mlc if self.keywords_per_label == 0 => fail("keywords_per_label must be positive"),
            Task::Mlc if self.vocab_size == 0 => fail("mlc needs at least one filler word"),
            Task::Qa if self.n_labels < 2 => fail("qa needs at least two topics"),
            Task::Qa if self.n_labels > 26 => fail("qa choice keys run from A to Z"),
            Task::Qa if self.overlap_k == 0 => fail("overlap_k must be positive"),
            Task::Qa if self.vocab_size < self.overlap_k + 2 => {
                fail("each topic needs at least overlap_k + 2 words")
            }
            _ => Ok(()),
        }
    }
}

/// A generated corpus with an embedding table covering its vocabulary.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: AnyCorpus,
    pub embeddings: EmbeddingStore,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `center + noise·u` for a random unit `u`.
fn near(rng: &mut ChaCha8Rng, center: &[f64], noise: f64) -> Vec<f64> {
    let u = random_unit(rng, center.len());
    center.iter().zip(u).map(|(c, x)| c + noise * x).collect()
}

fn scaled(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    random_unit(rng, dim).into_iter().map(|x| x * scale).collect()
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut store = EmbeddingStore::new(spec.embedding_dim, OovPolicy::Zeros);
    let corpus = match spec.task {
        Task::SeqTag => AnyCorpus::Tagged(seqtag(spec, &mut rng, &mut store)?),
        Task::Mlc => AnyCorpus::Classification(mlc(spec, &mut rng, &mut store)?),
        Task::Qa => AnyCorpus::Qa(qa(spec, &mut rng, &mut store)?),
    };
    if spec.embedding_scale != 1.0 {
        let mut scaled = EmbeddingStore::new(spec.embedding_dim, OovPolicy::Zeros);
        for (t, v) in store.iter() {
            let v: Vec<f64> = v.iter().map(|x| x * spec.embedding_scale).collect();
            scaled.insert(t, &v)?;
        }
        store = scaled;
    }
    Ok(SyntheticCorpus {
        corpus,
        embeddings: store,
    })
}

fn splits<S: crate::sample::PoolSample>(
    spec: &SyntheticSpec,
    mut make: impl FnMut(SplitName, usize) -> Result<S>,
) -> Result<Corpus<S>> {
    let mut build = |name| -> Result<CorpusSplit<S>> {
        let samples = (0..spec.count(name))
            .map(|i| make(name, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(CorpusSplit::new(name, samples))
    };
    Ok(Corpus {
        train: build(SplitName::Train)?,
        dev: build(SplitName::Dev)?,
        test: build(SplitName::Test)?,
    })
}

pub fn seqtag_word(i: usize) -> String {
    format!("tok{i:03}")
}

pub fn seqtag_tag(i: usize, n_tags: usize) -> String {
    format!("TAG{}", i % n_tags)
}

fn seqtag(spec: &SyntheticSpec, rng: &mut ChaCha8Rng, store: &mut EmbeddingStore) -> Result<Corpus<Sample>> {
    let centers: Vec<Vec<f64>> = (0..spec.n_labels)
        .map(|_| random_unit(rng, spec.embedding_dim))
        .collect();
    for i in 0..spec.vocab_size {
        let v = near(rng, &centers[i % spec.n_labels], 0.5);
        store.insert(seqtag_word(i), &v)?;
    }
    splits(spec, |name, i| {
        let len = rng.random_range(3..=8);
        let words: Vec<usize> = (0..len).map(|_| rng.random_range(0..spec.vocab_size)).collect();
        Sample::tagged(
            format!("{name}-{i}"),
            words.iter().map(|&w| seqtag_word(w)).collect(),
            words.iter().map(|&w| seqtag_tag(w, spec.n_labels)).collect(),
        )
    })
}

pub fn mlc_label(l: usize) -> String {
    format!("label{l}")
}

pub fn mlc_keyword(l: usize, j: usize) -> String {
    format!("key{l}x{j}")
}

fn mlc(spec: &SyntheticSpec, rng: &mut ChaCha8Rng, store: &mut EmbeddingStore) -> Result<Corpus<Sample>> {
    let dim = spec.embedding_dim;
    for l in 0..spec.n_labels {
        let center = random_unit(rng, dim);
        for j in 0..spec.keywords_per_label {
            let v = near(rng, &center, 0.3);
            store.insert(mlc_keyword(l, j), &v)?;
        }
    }
    let fillers: Vec<String> = (0..spec.vocab_size).map(|i| format!("w{i:03}")).collect();
    for f in &fillers {
        let v = scaled(rng, dim, 0.1);
        store.insert(f.as_str(), &v)?;
    }
    let max_labels = spec.n_labels.min(3);
    let label_ids: Vec<usize> = (0..spec.n_labels).collect();
    splits(spec, |name, i| {
        let n = rng.random_range(1..=max_labels);
        let mut chosen: Vec<usize> = label_ids.choose_multiple(rng, n).copied().collect();
        chosen.sort_unstable();
        let mut words = Vec::new();
        for &l in &chosen {
            let k = rng.random_range(1..=spec.keywords_per_label.min(2));
            let kws: Vec<usize> = (0..spec.keywords_per_label).collect();
            for &j in kws.choose_multiple(rng, k) {
                words.push(mlc_keyword(l, j));
            }
        }
        for _ in 0..rng.random_range(2..=6) {
            words.push(fillers.choose(rng).expect("non-empty").clone());
        }
        words.shuffle(rng);
        Ok(Sample {
            id: format!("{name}-{i}"),
            input_text: InputText::Sentence(words.join(" ")),
            oracle_label: chosen.into_iter().map(mlc_label).collect(),
        })
    })
}

pub fn qa_word(topic: usize, j: usize) -> String {
    format!("topic{topic}w{j}")
}

fn qa(spec: &SyntheticSpec, rng: &mut ChaCha8Rng, store: &mut EmbeddingStore) -> Result<Corpus<QaSample>> {
    let dim = spec.embedding_dim;
    for t in 0..spec.n_labels {
        let center = random_unit(rng, dim);
        for j in 0..spec.vocab_size {
            let v = near(rng, &center, 0.3);
            store.insert(qa_word(t, j), &v)?;
        }
    }
    for w in NEUTRAL_WORDS {
        let v = scaled(rng, dim, 0.1);
        store.insert(w, &v)?;
    }
    let k = spec.overlap_k;
    let words: Vec<usize> = (0..spec.vocab_size).collect();
    splits(spec, |name, i| {
        let mut topics: Vec<usize> = (0..spec.n_labels).collect();
        topics.shuffle(rng);
        let answer_pos = rng.random_range(0..spec.n_labels);
        let answer_topic = topics[answer_pos];
        let mut choices = Vec::with_capacity(spec.n_labels);
        let mut shared = Vec::new();
        for (pos, &t) in topics.iter().enumerate() {
            let picked: Vec<String> = words.choose_multiple(rng, k).map(|&j| qa_word(t, j)).collect();
            if pos == answer_pos {
                shared = picked.clone();
            }
            let key = char::from(b'A' + pos as u8).to_string();
            choices.push((key, picked.join(" ")));
        }
        // Context words come from the answer topic but never repeat a choice token.
        let context: Vec<&usize> = words
            .iter()
            .filter(|&&j| !shared.contains(&qa_word(answer_topic, j)))
            .collect();
        let mut question: Vec<String> = shared.clone();
        question.extend(context.choose_multiple(rng, 2).map(|&&j| qa_word(answer_topic, j)));
        question.extend(NEUTRAL_WORDS.choose_multiple(rng, 2).map(|w| w.to_string()));
        question.shuffle(rng);
        let mut fact1: Vec<String> = shared.clone();
        fact1.extend(context.choose_multiple(rng, 2).map(|&&j| qa_word(answer_topic, j)));
        fact1.shuffle(rng);
        let mut fact2: Vec<String> = context
            .choose_multiple(rng, 3)
            .map(|&&j| qa_word(answer_topic, j))
            .collect();
        fact2.push(NEUTRAL_WORDS.choose(rng).expect("non-empty").to_string());
        fact2.shuffle(rng);
        QaSample::new(
            format!("{name}-{i}"),
            format!("{}?", question.join(" ")),
            vec![fact1.join(" "), fact2.join(" ")],
            choices,
            char::from(b'A' + answer_pos as u8).to_string(),
        )
    })
}
