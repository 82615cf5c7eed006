//! Run configuration: a flat TOML table, overridable key by key from the
//! command line.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use textgym::agents::{AgentKind, DqnConfig, PpoConfig, TrainOptions};
use textgym::datasets::{generate_synthetic, AnyCorpus, CorpusSource, QaFormat, SyntheticSpec};
use textgym::factory::load_embeddings;
use textgym::{EmbeddingStore, EnvOptions, FeaturizerKind, RewardFlavor, Task};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub agent: AgentKind,
    /// Defaults to `hash` for tagging and classification, `informed` for QA.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub featurizer: Option<FeaturizerKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    pub reward: RewardFlavor,
    /// Corpus directory; the seeded synthetic corpus is used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    pub synthetic_seed: u64,
    pub token_col: usize,
    pub tag_col: usize,
    pub qa_format: QaFormat,
    pub output_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub total_steps: usize,
    pub log_every: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_mean_return: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_eval_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    pub hash_dim: usize,
    pub hash_seed: u64,
    pub shuffle_choices: bool,
    /// Learner steps after each sample in `online`.
    pub online_budget: usize,
    pub online_log_every: usize,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_grad_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_starts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_freq: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_update_interval: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exploration_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exploration_final_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub double_q: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gae_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip_range: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ent_coef: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vf_coef: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: Task::SeqTag,
            agent: AgentKind::Ppo,
            featurizer: None,
            embeddings: None,
            reward: RewardFlavor::Dense,
            corpus: None,
            synthetic_seed: 7,
            token_col: 0,
            tag_col: 1,
            qa_format: QaFormat::Native,
            output_dir: PathBuf::from("runs/latest"),
            seeds: vec![0, 1, 2, 3, 4],
            total_steps: 50_000,
            log_every: 1000,
            target_mean_return: None,
            target_eval_score: None,
            max_steps: None,
            hash_dim: 300,
            hash_seed: 0,
            shuffle_choices: false,
            online_budget: 100,
            online_log_every: 50,
            hidden: None,
            learning_rate: None,
            gamma: None,
            batch_size: None,
            max_grad_norm: None,
            buffer_size: None,
            learning_starts: None,
            train_freq: None,
            target_update_interval: None,
            exploration_fraction: None,
            exploration_final_eps: None,
            double_q: None,
            n_steps: None,
            n_epochs: None,
            gae_lambda: None,
            clip_range: None,
            ent_coef: None,
            vf_coef: None,
        }
    }
}

/// Corpus plus the vectors that ship with it (synthetic corpora only).
pub struct LoadedData {
    pub corpus: AnyCorpus,
    pub bundled: Option<EmbeddingStore>,
}

impl RunConfig {
    /// Builds a config from an optional TOML file and `key=value` overrides,
    /// applied in order. Override values are parsed as TOML, falling back to a
    /// bare string.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut table = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for (k, v) in overrides {
            table.insert(k.clone(), parse_value(v));
        }
        let cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::usage(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::usage(m));
        let feat = self.featurizer();
        feat.check_task(self.task).map_err(CliError::usage)?;
        if feat.needs_file() && self.embeddings.is_none() && self.corpus.is_some() {
            return usage(format!("featurizer `{feat}` needs `embeddings` for a corpus on disk"));
        }
        if self.seeds.is_empty() {
            return usage("`seeds` is empty".into());
        }
        if self.log_every == 0 {
            return usage("`log_every` must be positive".into());
        }
        if self.hash_dim == 0 {
            return usage("`hash_dim` must be positive".into());
        }
        match self.agent {
            AgentKind::Dqn => self.dqn_config().validate().map_err(CliError::usage),
            AgentKind::Ppo => self.ppo_config().validate().map_err(CliError::usage),
            AgentKind::Oracle => Ok(()),
        }
    }

    pub fn featurizer(&self) -> FeaturizerKind {
        self.featurizer.unwrap_or(match self.task {
            Task::Qa => FeaturizerKind::Informed,
            _ => FeaturizerKind::Hash,
        })
    }

    pub fn env_options(&self, seed: u64) -> EnvOptions {
        EnvOptions {
            featurizer: self.featurizer(),
            reward: self.reward,
            seed,
            max_steps: self.max_steps,
            hash_dim: self.hash_dim,
            hash_seed: self.hash_seed,
            shuffle_choices: self.shuffle_choices,
        }
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            total_steps: self.total_steps,
            log_every: self.log_every,
            target_mean_return: self.target_mean_return,
            target_eval_score: self.target_eval_score,
        }
    }

    pub fn dqn_config(&self) -> DqnConfig {
        let mut c = DqnConfig::for_task(self.task);
        set(&mut c.hidden, &self.hidden);
        set(&mut c.learning_rate, &self.learning_rate);
        set(&mut c.gamma, &self.gamma);
        set(&mut c.batch_size, &self.batch_size);
        set(&mut c.max_grad_norm, &self.max_grad_norm);
        set(&mut c.buffer_size, &self.buffer_size);
        set(&mut c.learning_starts, &self.learning_starts);
        set(&mut c.train_freq, &self.train_freq);
        set(&mut c.target_update_interval, &self.target_update_interval);
        set(&mut c.exploration_fraction, &self.exploration_fraction);
        set(&mut c.exploration_final_eps, &self.exploration_final_eps);
        set(&mut c.double_q, &self.double_q);
        c
    }

    pub fn ppo_config(&self) -> PpoConfig {
        let mut c = PpoConfig::for_task(self.task);
        set(&mut c.hidden, &self.hidden);
        set(&mut c.learning_rate, &self.learning_rate);
        set(&mut c.gamma, &self.gamma);
        set(&mut c.batch_size, &self.batch_size);
        set(&mut c.max_grad_norm, &self.max_grad_norm);
        set(&mut c.n_steps, &self.n_steps);
        set(&mut c.n_epochs, &self.n_epochs);
        set(&mut c.gae_lambda, &self.gae_lambda);
        set(&mut c.clip_range, &self.clip_range);
        set(&mut c.ent_coef, &self.ent_coef);
        set(&mut c.vf_coef, &self.vf_coef);
        c
    }

    /// Agent hyperparameters after defaults and overrides, as JSON.
    pub fn agent_config_json(&self) -> serde_json::Value {
        match self.agent {
            AgentKind::Dqn => serde_json::to_value(self.dqn_config()),
            AgentKind::Ppo => serde_json::to_value(self.ppo_config()),
            AgentKind::Oracle => Ok(serde_json::Value::Null),
        }
        .expect("agent config serializes")
    }

    /// Reads the corpus directory, or generates the synthetic corpus. Failures
    /// here are usage errors.
    pub fn load_data(&self) -> Result<LoadedData, CliError> {
        match &self.corpus {
            Some(dir) => {
                let src = CorpusSource {
                    dir: dir.clone(),
                    token_col: self.token_col,
                    tag_col: self.tag_col,
                    qa_format: self.qa_format,
                };
                let corpus = src.load(self.task).map_err(CliError::usage)?;
                Ok(LoadedData { corpus, bundled: None })
            }
            None => {
                let mut spec = SyntheticSpec::for_task(self.task);
                spec.seed = self.synthetic_seed;
                let syn = generate_synthetic(&spec).map_err(CliError::usage)?;
                Ok(LoadedData { corpus: syn.corpus, bundled: Some(syn.embeddings) })
            }
        }
    }

    /// Vector store for `data`: an explicit file wins, then hashing when
    /// asked for, then the synthetic corpus's own vectors.
    pub fn embeddings_for(&self, data: &mut LoadedData) -> Result<Arc<EmbeddingStore>, CliError> {
        let opts = self.env_options(0);
        if self.embeddings.is_none() && opts.featurizer != FeaturizerKind::Hash {
            if let Some(store) = data.bundled.take() {
                return Ok(Arc::new(store));
            }
        }
        load_embeddings(&opts, self.embeddings.as_deref()).map_err(CliError::usage)
    }
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_is_lossless() {
        let mut cfg = RunConfig::default();
        cfg.task = Task::Qa;
        cfg.featurizer = Some(FeaturizerKind::Simple);
        cfg.learning_rate = Some(1e-4);
        cfg.hidden = Some(vec![64, 64]);
        cfg.target_eval_score = Some(0.9);
        cfg.corpus = Some("data/qasc".into());
        let text = cfg.to_toml();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(toml::from_str::<RunConfig>(&RunConfig::default().to_toml()).unwrap(), RunConfig::default());
    }

    #[test]
    fn overrides_are_typed() {
        let ov = vec![
            parse_override("task=mlc").unwrap(),
            parse_override("seeds=[3, 4]").unwrap(),
            parse_override("learning_rate=0.01").unwrap(),
            parse_override("total_steps = 2000").unwrap(),
        ];
        let cfg = RunConfig::resolve(None, &ov).unwrap();
        assert_eq!(cfg.task, Task::Mlc);
        assert_eq!(cfg.seeds, vec![3, 4]);
        assert_eq!(cfg.total_steps, 2000);
        assert_eq!(cfg.ppo_config().learning_rate, 0.01);
        assert_eq!(cfg.ppo_config().hidden, vec![200, 200]);
    }

    #[test]
    fn bad_keys_and_values_are_usage_errors() {
        for ov in ["nonsense=1", "task=poetry", "agent=sarsa", "seeds=[]", "featurizer=informed"] {
            let err = RunConfig::resolve(None, &[parse_override(ov).unwrap()]).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{ov}");
        }
        assert!(parse_override("novalue").is_err());
    }

    #[test]
    fn featurizer_default_follows_task() {
        let qa = RunConfig { task: Task::Qa, ..Default::default() };
        assert_eq!(qa.featurizer(), FeaturizerKind::Informed);
        assert_eq!(RunConfig::default().featurizer(), FeaturizerKind::Hash);
    }
}
