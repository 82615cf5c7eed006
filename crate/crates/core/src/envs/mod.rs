//! Task environments.

pub mod mlc;
pub mod qa;
pub mod seqtag;

pub use mlc::{MlcEnv, MlcEpisode, TERM_ACTION};
pub use qa::{QaEnv, QaEpisode, ANSWER_ACTION, CONTINUE_ACTION};
pub use seqtag::{SeqTagEnv, SeqTagEpisode};

use std::collections::BTreeMap;

use crate::env::StepResult;
use crate::featurize::FeatureVector;

pub(crate) fn step_result(
    observation: FeatureVector,
    reward: f64,
    done: bool,
    info: BTreeMap<String, String>,
) -> StepResult {
    StepResult {
        observation,
        reward,
        done,
        info,
    }
}

pub(crate) fn flag(key: &str) -> BTreeMap<String, String> {
    BTreeMap::from([(key.to_string(), "true".to_string())])
}
