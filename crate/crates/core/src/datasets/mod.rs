//! Corpus parsers, writers and seeded synthetic generators.

mod conll;
mod jsonl;
pub mod synthetic;

pub use conll::{parse_conll_columns, write_conll};
pub use jsonl::{parse_mlc_jsonl, parse_qa_jsonl, write_mlc_jsonl, write_qa_jsonl, QaFormat};
pub use synthetic::{generate_synthetic, SyntheticCorpus, SyntheticSpec};

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::Task;
use crate::error::{Error, Result};
use crate::sample::{PoolSample, QaSample, Sample};

/// Whitespace tokenization with punctuation split off as separate tokens.
///
/// Punctuation between two alphanumeric characters (`don't`, `1996-12-06`,
/// `U.S`) stays inside the token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let inner = i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_alphanumeric()
                && chars[i + 1].is_alphanumeric();
            if c.is_ascii_punctuation() && !inner {
                if !current.is_empty() {
                    out.push(std::mem::take(&mut current));
                }
                out.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Dev, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitName::Train),
            "dev" | "valid" | "validation" => Ok(SplitName::Dev),
            "test" => Ok(SplitName::Test),
            other => Err(Error::Config(format!("unknown split `{other}`"))),
        }
    }
}

/// One split of a corpus with the sorted label vocabulary it uses.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit<S> {
    pub name: SplitName,
    pub samples: Vec<S>,
    pub labels: Vec<String>,
}

impl<S: PoolSample> CorpusSplit<S> {
    /// Builds a split, deriving the vocabulary from the samples.
    pub fn new(name: SplitName, samples: Vec<S>) -> Self {
        let labels = label_union(samples.iter().map(|s| s.vocabulary_labels()));
        Self {
            name,
            samples,
            labels,
        }
    }
}

impl<S> CorpusSplit<S> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn label_union<'a>(sets: impl Iterator<Item = &'a [String]>) -> Vec<String> {
    let set: BTreeSet<&String> = sets.flatten().collect();
    set.into_iter().cloned().collect()
}

/// Train, dev and test splits of one corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus<S> {
    pub train: CorpusSplit<S>,
    pub dev: CorpusSplit<S>,
    pub test: CorpusSplit<S>,
}

impl<S> Corpus<S> {
    pub fn split(&self, name: SplitName) -> &CorpusSplit<S> {
        match name {
            SplitName::Train => &self.train,
            SplitName::Dev => &self.dev,
            SplitName::Test => &self.test,
        }
    }

    /// Sorted union of the label vocabularies of all splits.
    pub fn labels(&self) -> Vec<String> {
        let set: BTreeSet<&String> = SplitName::ALL
            .iter()
            .flat_map(|&n| self.split(n).labels.iter())
            .collect();
        set.into_iter().cloned().collect()
    }
}

/// A corpus of either sample shape.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyCorpus {
    Tagged(Corpus<Sample>),
    Classification(Corpus<Sample>),
    Qa(Corpus<QaSample>),
}

impl AnyCorpus {
    pub fn task(&self) -> Task {
        match self {
            AnyCorpus::Tagged(_) => Task::SeqTag,
            AnyCorpus::Classification(_) => Task::Mlc,
            AnyCorpus::Qa(_) => Task::Qa,
        }
    }
}

/// Default file name of a split inside a corpus directory.
pub fn split_file_name(task: Task, split: SplitName) -> String {
    match task {
        Task::SeqTag => format!("{split}.conll"),
        Task::Mlc | Task::Qa => format!("{split}.jsonl"),
    }
}

/// Location and column conventions of an on-disk corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSource {
    pub dir: PathBuf,
    pub token_col: usize,
    pub tag_col: usize,
    pub qa_format: QaFormat,
}

impl CorpusSource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            token_col: 0,
            tag_col: 1,
            qa_format: QaFormat::Native,
        }
    }

    fn open(&self, task: Task, split: SplitName) -> Result<BufReader<File>> {
        let path = self.dir.join(split_file_name(task, split));
        let file = File::open(&path).map_err(|e| {
            Error::Config(format!("cannot open corpus file {}: {e}", path.display()))
        })?;
        Ok(BufReader::new(file))
    }

    /// Loads `train`, `dev` and `test` files for `task` from the directory.
    pub fn load(&self, task: Task) -> Result<AnyCorpus> {
        match task {
            Task::SeqTag => {
                let load = |s| parse_conll_columns(self.open(task, s)?, self.token_col, self.tag_col, s);
                Ok(AnyCorpus::Tagged(Corpus {
                    train: load(SplitName::Train)?,
                    dev: load(SplitName::Dev)?,
                    test: load(SplitName::Test)?,
                }))
            }
            Task::Mlc => {
                let load = |s| parse_mlc_jsonl(self.open(task, s)?, s);
                Ok(AnyCorpus::Classification(Corpus {
                    train: load(SplitName::Train)?,
                    dev: load(SplitName::Dev)?,
                    test: load(SplitName::Test)?,
                }))
            }
            Task::Qa => {
                let load = |s| parse_qa_jsonl(self.open(task, s)?, s, self.qa_format);
                Ok(AnyCorpus::Qa(Corpus {
                    train: load(SplitName::Train)?,
                    dev: load(SplitName::Dev)?,
                    test: load(SplitName::Test)?,
                }))
            }
        }
    }
}

/// Writes all three splits of `corpus` into `dir` using the default file names.
pub fn write_corpus(corpus: &AnyCorpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let task = corpus.task();
    for split in SplitName::ALL {
        let file = File::create(dir.join(split_file_name(task, split)))?;
        let mut out = std::io::BufWriter::new(file);
        match corpus {
            AnyCorpus::Tagged(c) => write_conll(c.split(split), &mut out)?,
            AnyCorpus::Classification(c) => write_mlc_jsonl(c.split(split), &mut out)?,
            AnyCorpus::Qa(c) => write_qa_jsonl(c.split(split), &mut out)?,
        }
        std::io::Write::flush(&mut out)?;
    }
    Ok(())
}
