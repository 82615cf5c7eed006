//! Builds environments from a corpus and featurizer choice, and wraps the three
//! task environments behind one runtime-dispatched type.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agents::{
    evaluate, train, Agent, EvalReport, GreedyPolicy, Mlp, OraclePolicy, Policy, RandomPolicy, RunRecord,
    TrainOptions,
};
use crate::datasets::{AnyCorpus, SplitName};
use crate::env::{EnvConfig, Environment, Observation, RewardFlavor, StepResult, Task};
use crate::error::{Error, Result};
use crate::featurize::{EmbeddingStore, Layout, OovPolicy};
use crate::envs::{MlcEnv, QaEnv, SeqTagEnv};
use crate::rng::StreamRng;
use crate::space::ActionSpace;

/// Action selection rule for [`AnyEnv`] helpers.
pub enum PolicyChoice<'a> {
    Greedy(&'a Mlp),
    Oracle,
    Random(StreamRng),
}

fn with_policy<E: Environment, T>(choice: &mut PolicyChoice<'_>, f: impl FnOnce(&mut dyn Policy<E>) -> T) -> T {
    match choice {
        PolicyChoice::Greedy(net) => f(&mut GreedyPolicy::new(net)),
        PolicyChoice::Oracle => f(&mut OraclePolicy),
        PolicyChoice::Random(rng) => f(&mut RandomPolicy::new(rng)),
    }
}

fn mismatch(env: Task, corpus: Task) -> Error {
    Error::Config(format!("{env} environment cannot use a {corpus} corpus"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeaturizerKind {
    /// Word vectors read from a fastText-style text file.
    Fasttext,
    /// Subword vectors read from a BPEmb-style text file.
    Bytepair,
    /// Deterministic hashed vectors, no file needed.
    Hash,
    /// QA: pooled question, choice and facts vectors.
    Simple,
    /// QA: cosine of the choice with the question and with the facts.
    Informed,
}

impl FeaturizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeaturizerKind::Fasttext => "fasttext",
            FeaturizerKind::Bytepair => "bytepair",
            FeaturizerKind::Hash => "hash",
            FeaturizerKind::Simple => "simple",
            FeaturizerKind::Informed => "informed",
        }
    }

    pub fn check_task(self, task: Task) -> Result<()> {
        let qa_only = matches!(self, FeaturizerKind::Simple | FeaturizerKind::Informed);
        match (task, qa_only) {
            (Task::Qa, false) => Err(Error::Config(format!(
                "featurizer `{self}` is not a QA featurizer; use simple or informed"
            ))),
            (Task::SeqTag | Task::Mlc, true) => {
                Err(Error::Config(format!("featurizer `{self}` is only valid for qa")))
            }
            _ => Ok(()),
        }
    }

    pub fn needs_file(self) -> bool {
        matches!(self, FeaturizerKind::Fasttext | FeaturizerKind::Bytepair)
    }
}

impl fmt::Display for FeaturizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeaturizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fasttext" => Ok(FeaturizerKind::Fasttext),
            "bytepair" => Ok(FeaturizerKind::Bytepair),
            "hash" => Ok(FeaturizerKind::Hash),
            "simple" => Ok(FeaturizerKind::Simple),
            "informed" => Ok(FeaturizerKind::Informed),
            other => Err(Error::Config(format!("unknown featurizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvOptions {
    pub featurizer: FeaturizerKind,
    pub reward: RewardFlavor,
    pub seed: u64,
    pub max_steps: Option<usize>,
    /// Dimension of hashed vectors (hash featurizer, or QA without a vector file).
    pub hash_dim: usize,
    pub hash_seed: u64,
    /// QA only: present choices in a seeded random order.
    pub shuffle_choices: bool,
}

impl EnvOptions {
    pub fn new(featurizer: FeaturizerKind, seed: u64) -> Self {
        Self {
            featurizer,
            reward: RewardFlavor::Dense,
            seed,
            max_steps: None,
            hash_dim: 300,
            hash_seed: 0,
            shuffle_choices: false,
        }
    }

    fn env_config(&self) -> EnvConfig {
        EnvConfig {
            reward: self.reward,
            max_steps: self.max_steps,
            seed: self.seed,
        }
    }
}

/// Reads a vector file, or builds a hashed store when no file applies.
pub fn load_embeddings(opts: &EnvOptions, path: Option<&Path>) -> Result<Arc<EmbeddingStore>> {
    match (opts.featurizer, path) {
        (FeaturizerKind::Hash, _) | (FeaturizerKind::Simple | FeaturizerKind::Informed, None) => {
            Ok(Arc::new(EmbeddingStore::hashed(opts.hash_dim, opts.hash_seed)))
        }
        (_, Some(p)) => {
            let file = File::open(p)
                .map_err(|e| Error::Config(format!("cannot open embeddings {}: {e}", p.display())))?;
            Ok(Arc::new(EmbeddingStore::load(BufReader::new(file), OovPolicy::Zeros)?))
        }
        (kind, None) => Err(Error::Config(format!("featurizer `{kind}` needs an embeddings file"))),
    }
}

/// Any of the three task environments.
pub enum AnyEnv {
    SeqTag(SeqTagEnv),
    Mlc(MlcEnv),
    Qa(QaEnv),
}

macro_rules! dispatch {
    ($self:expr, $e:ident => $body:expr) => {
        match $self {
            AnyEnv::SeqTag($e) => $body,
            AnyEnv::Mlc($e) => $body,
            AnyEnv::Qa($e) => $body,
        }
    };
}

impl AnyEnv {
    /// Environment with an empty pool; labels span all splits of `corpus`.
    pub fn new(corpus: &AnyCorpus, store: Arc<EmbeddingStore>, opts: &EnvOptions) -> Result<Self> {
        opts.featurizer.check_task(corpus.task())?;
        let cfg = opts.env_config();
        Ok(match corpus {
            AnyCorpus::Tagged(c) => AnyEnv::SeqTag(SeqTagEnv::new(&c.labels(), store, cfg)?),
            AnyCorpus::Classification(c) => AnyEnv::Mlc(MlcEnv::new(&c.labels(), store, cfg)?),
            AnyCorpus::Qa(_) => {
                let env = match opts.featurizer {
                    FeaturizerKind::Informed => QaEnv::informed(store, cfg)?,
                    _ => QaEnv::simple(store, cfg)?,
                };
                AnyEnv::Qa(env.with_shuffled_choices(opts.shuffle_choices))
            }
        })
    }

    /// Environment whose pool holds all of `split`.
    pub fn from_corpus(
        corpus: &AnyCorpus,
        split: SplitName,
        store: Arc<EmbeddingStore>,
        opts: &EnvOptions,
    ) -> Result<Self> {
        let mut env = Self::new(corpus, store, opts)?;
        let n = corpus_len(corpus, split);
        env.add_samples(corpus, split, 0..n)?;
        Ok(env)
    }

    /// Adds samples `range` of `split` to the pool with weight 1.
    pub fn add_samples(&mut self, corpus: &AnyCorpus, split: SplitName, range: std::ops::Range<usize>) -> Result<()> {
        match (self, corpus) {
            (AnyEnv::SeqTag(e), AnyCorpus::Tagged(c)) => add_all(e, &c.split(split).samples[range]),
            (AnyEnv::Mlc(e), AnyCorpus::Classification(c)) => add_all(e, &c.split(split).samples[range]),
            (AnyEnv::Qa(e), AnyCorpus::Qa(c)) => add_all(e, &c.split(split).samples[range]),
            (e, c) => Err(mismatch(e.task(), c.task())),
        }
    }

    /// Runs one episode per sample in `range` of `split` and scores them.
    pub fn evaluate_range(
        &mut self,
        corpus: &AnyCorpus,
        split: SplitName,
        range: std::ops::Range<usize>,
        policy: &mut PolicyChoice<'_>,
    ) -> Result<EvalReport> {
        match (self, corpus) {
            (AnyEnv::SeqTag(e), AnyCorpus::Tagged(c)) => {
                with_policy(policy, |p| evaluate(e, p, &c.split(split).samples[range]))
            }
            (AnyEnv::Mlc(e), AnyCorpus::Classification(c)) => {
                with_policy(policy, |p| evaluate(e, p, &c.split(split).samples[range]))
            }
            (AnyEnv::Qa(e), AnyCorpus::Qa(c)) => with_policy(policy, |p| evaluate(e, p, &c.split(split).samples[range])),
            (e, c) => Err(mismatch(e.task(), c.task())),
        }
    }

    pub fn evaluate(&mut self, corpus: &AnyCorpus, split: SplitName, policy: &mut PolicyChoice<'_>) -> Result<EvalReport> {
        let n = corpus_len(corpus, split);
        self.evaluate_range(corpus, split, 0..n, policy)
    }

    /// Action chosen by `policy` in the current state.
    pub fn act(&self, policy: &mut PolicyChoice<'_>, obs: &Observation) -> Result<usize> {
        dispatch!(self, e => with_policy(policy, |p| p.act(e, obs)))
    }

    pub fn learn<A: Agent>(&mut self, agent: &mut A, steps: usize) -> Result<()> {
        dispatch!(self, e => agent.learn(e, steps))
    }

    /// Trains `agent`, scoring greedy play on the dev split of `dev` at each log point.
    pub fn train<A: Agent>(
        &mut self,
        agent: &mut A,
        opts: &TrainOptions,
        dev: Option<(&mut AnyEnv, &AnyCorpus)>,
    ) -> Result<RunRecord> {
        let mut eval = dev.map(|(env, corpus)| {
            move |a: &A| -> Result<f64> {
                let mut p = PolicyChoice::Greedy(a.policy_network());
                Ok(env.evaluate(corpus, SplitName::Dev, &mut p)?.score)
            }
        });
        match (self, eval.as_mut()) {
            (AnyEnv::SeqTag(e), f) => train(agent, e, opts, f),
            (AnyEnv::Mlc(e), f) => train(agent, e, opts, f),
            (AnyEnv::Qa(e), f) => train(agent, e, opts, f),
        }
    }

    pub fn task(&self) -> Task {
        dispatch!(self, e => e.task())
    }

    pub fn outcome_score(&self) -> Option<f64> {
        dispatch!(self, e => e.outcome().map(|o| o.score()))
    }

    /// Starts an episode on a sample drawn from the pool.
    pub fn reset(&mut self) -> Result<Observation> {
        dispatch!(self, e => e.reset(None))
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        dispatch!(self, e => e.step(action))
    }

    pub fn action_space(&self) -> &ActionSpace {
        dispatch!(self, e => e.action_space())
    }

    pub fn layout(&self) -> &Layout {
        dispatch!(self, e => e.layout())
    }

    pub fn observation_dim(&self) -> usize {
        dispatch!(self, e => e.observation_dim())
    }

    pub fn is_done(&self) -> bool {
        dispatch!(self, e => e.is_done())
    }

    pub fn total_reward(&self) -> f64 {
        dispatch!(self, e => e.total_reward())
    }

    pub fn oracle_action(&self) -> Option<usize> {
        dispatch!(self, e => e.oracle_action())
    }

    pub fn pool_len(&self) -> usize {
        dispatch!(self, e => e.pool_len())
    }

    pub fn transcript(&self) -> Option<serde_json::Value> {
        dispatch!(self, e => e.transcript())
    }

    pub fn render(&self) -> String {
        dispatch!(self, e => e.render())
    }
}

fn add_all<E: Environment>(env: &mut E, samples: &[E::Sample]) -> Result<()> {
    for s in samples {
        env.add_sample(s.clone(), 1.0)?;
    }
    Ok(())
}

pub fn corpus_len(corpus: &AnyCorpus, split: SplitName) -> usize {
    match corpus {
        AnyCorpus::Tagged(c) | AnyCorpus::Classification(c) => c.split(split).len(),
        AnyCorpus::Qa(c) => c.split(split).len(),
    }
}
