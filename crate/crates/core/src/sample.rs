//! Annotated data points consumed by the environments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Textual input of a [`Sample`]: pre-tokenized for tagging, raw for classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputText {
    Tokens(Vec<String>),
    Sentence(String),
}

impl InputText {
    /// Surface form, tokens joined by single spaces.
    pub fn text(&self) -> String {
        match self {
            InputText::Tokens(t) => t.join(" "),
            InputText::Sentence(s) => s.clone(),
        }
    }
}

/// One annotated data point for sequence tagging or multi-label classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub input_text: InputText,
    pub oracle_label: Vec<String>,
}

impl Sample {
    /// Tagging sample; requires one label per token.
    pub fn tagged<S: Into<String>>(
        id: impl Into<String>,
        tokens: Vec<S>,
        labels: Vec<S>,
    ) -> Result<Self> {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if tokens.len() != labels.len() {
            return Err(Error::InvalidSample(format!(
                "{} tokens but {} labels",
                tokens.len(),
                labels.len()
            )));
        }
        Ok(Self {
            id: id.into(),
            input_text: InputText::Tokens(tokens),
            oracle_label: labels,
        })
    }

    /// Classification sample over a raw sentence.
    pub fn sentence<S: Into<String>>(
        id: impl Into<String>,
        text: impl Into<String>,
        labels: Vec<S>,
    ) -> Self {
        Self {
            id: id.into(),
            input_text: InputText::Sentence(text.into()),
            oracle_label: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn tokens(&self) -> Option<&[String]> {
        match &self.input_text {
            InputText::Tokens(t) => Some(t),
            InputText::Sentence(_) => None,
        }
    }
}

/// Multiple-choice question with optional supporting facts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaSample {
    pub id: String,
    pub question: String,
    pub facts: Vec<String>,
    /// Ordered (key, text) pairs, e.g. `("A", "energy")`.
    pub choices: Vec<(String, String)>,
    pub answer_key: String,
}

impl QaSample {
    pub fn new(
        id: impl Into<String>,
        question: impl Into<String>,
        facts: Vec<String>,
        choices: Vec<(String, String)>,
        answer_key: impl Into<String>,
    ) -> Result<Self> {
        let sample = Self {
            id: id.into(),
            question: question.into(),
            facts,
            choices,
            answer_key: answer_key.into(),
        };
        sample.validate()?;
        Ok(sample)
    }

    pub fn validate(&self) -> Result<()> {
        if self.choices.len() < 2 {
            return Err(Error::InvalidSample(format!(
                "question `{}` has {} choice(s), need at least 2",
                self.id,
                self.choices.len()
            )));
        }
        for (i, (k, _)) in self.choices.iter().enumerate() {
            if self.choices[..i].iter().any(|(other, _)| other == k) {
                return Err(Error::InvalidSample(format!("duplicate choice key `{k}`")));
            }
        }
        if self.answer_position().is_none() {
            return Err(Error::InvalidSample(format!(
                "answer key `{}` is not among the choices",
                self.answer_key
            )));
        }
        Ok(())
    }

    pub fn answer_position(&self) -> Option<usize> {
        self.choices.iter().position(|(k, _)| *k == self.answer_key)
    }
}

/// What a [`crate::pool::DataPool`] needs to know about its entries.
pub trait PoolSample: Clone {
    fn id(&self) -> &str;
    /// Labels that must belong to the pool vocabulary.
    fn vocabulary_labels(&self) -> &[String];
}

impl PoolSample for Sample {
    fn id(&self) -> &str {
        &self.id
    }

    fn vocabulary_labels(&self) -> &[String] {
        &self.oracle_label
    }
}

impl PoolSample for QaSample {
    fn id(&self) -> &str {
        &self.id
    }

    fn vocabulary_labels(&self) -> &[String] {
        &[]
    }
}
