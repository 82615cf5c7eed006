//! `eval`: pick the best seed on dev, report it on test.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use textgym::agents::{Checkpoint, EvalReport};
use textgym::datasets::{AnyCorpus, SplitName};
use textgym::factory::{corpus_len, PolicyChoice};
use textgym::AnyEnv;

use crate::train::read_config_echo;
use crate::{CliError, RunConfig};

#[derive(Debug, Serialize)]
pub struct SeedScore {
    pub seed: u64,
    pub dev_score: f64,
}

#[derive(Debug, Serialize)]
pub struct EvalSummary {
    pub task: String,
    pub agent: String,
    pub featurizer: String,
    pub metric_name: String,
    pub dev_scores: Vec<SeedScore>,
    pub selected_seed: u64,
    pub test_score: f64,
    pub test_mean_episode_score: f64,
    pub n_test: usize,
    pub transcripts: Vec<Value>,
}

/// Checkpoints in `dir` named `seed-{n}.checkpoint.json`, by ascending seed.
pub fn find_checkpoints(dir: &Path) -> Result<Vec<(u64, PathBuf)>, CliError> {
    let mut found = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(seed) = name
            .strip_prefix("seed-")
            .and_then(|r| r.strip_suffix(".checkpoint.json"))
            .and_then(|s| s.parse::<u64>().ok())
        {
            found.push((seed, path));
        }
    }
    found.sort();
    Ok(found)
}

fn score(env: &mut AnyEnv, corpus: &AnyCorpus, split: SplitName, ck: &Checkpoint) -> Result<EvalReport, CliError> {
    let net = ck.policy_network()?;
    let mut policy = match &net {
        Some(n) => PolicyChoice::Greedy(n),
        None => PolicyChoice::Oracle,
    };
    env.evaluate(corpus, split, &mut policy)
        .map_err(|e| CliError::runtime(format!("seed {}: {e}", ck.seed)))
}

/// Evaluates every checkpoint of the run in `run_dir`. `cfg` defaults to the
/// run's echoed config.
pub fn run_eval(run_dir: &Path, cfg: Option<RunConfig>) -> Result<EvalSummary, CliError> {
    let cfg = match cfg {
        Some(c) => c,
        None => read_config_echo(run_dir)?,
    };
    let cks = find_checkpoints(run_dir)?;
    if cks.is_empty() {
        return Err(CliError::runtime(format!("no seed-*.checkpoint.json in {}", run_dir.display())));
    }
    let mut data = cfg.load_data()?;
    let store = cfg.embeddings_for(&mut data)?;
    let corpus = &data.corpus;
    for split in [SplitName::Dev, SplitName::Test] {
        if corpus_len(corpus, split) == 0 {
            return Err(CliError::usage(format!("the {split} split is empty")));
        }
    }
    let opts = cfg.env_options(cfg.seeds[0]);
    let mut env = AnyEnv::new(corpus, store, &opts).map_err(CliError::usage)?;

    let mut dev_scores = Vec::new();
    let mut best: Option<(f64, Checkpoint)> = None;
    for (seed, path) in cks {
        let ck = Checkpoint::load(&path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        let dev = score(&mut env, corpus, SplitName::Dev, &ck)?;
        log::info!("seed {seed}: dev {} = {}", dev.metric_name, dev.score);
        dev_scores.push(SeedScore { seed, dev_score: dev.score });
        // Strictly greater, so ties keep the lowest seed.
        if best.as_ref().is_none_or(|(b, _)| dev.score > *b) {
            best = Some((dev.score, ck));
        }
    }
    let (_, ck) = best.expect("at least one checkpoint");
    let test = score(&mut env, corpus, SplitName::Test, &ck)?;
    Ok(EvalSummary {
        task: cfg.task.to_string(),
        agent: ck.agent.to_string(),
        featurizer: cfg.featurizer().to_string(),
        metric_name: test.metric_name,
        dev_scores,
        selected_seed: ck.seed,
        test_score: test.score,
        test_mean_episode_score: test.mean_episode_score,
        n_test: test.n_samples,
        transcripts: test.transcripts,
    })
}
