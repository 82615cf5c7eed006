//! `online`: predict each training sample before learning from it.

use std::io::Write;
use std::path::PathBuf;

use textgym::agents::Agent;
use textgym::datasets::SplitName;
use textgym::factory::{corpus_len, PolicyChoice};
use textgym::AnyEnv;

use crate::{build_agent, CliError, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineSummary {
    /// Per-sample match score of the prediction made before learning.
    pub scores: Vec<f64>,
    /// Window means printed as running match scores.
    pub running: Vec<f64>,
    pub csv: PathBuf,
}

pub fn run_online<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<OnlineSummary, CliError> {
    let mut data = cfg.load_data()?;
    let store = cfg.embeddings_for(&mut data)?;
    let corpus = &data.corpus;
    let n = corpus_len(corpus, SplitName::Train);
    if n == 0 {
        return Err(CliError::usage("the train split is empty"));
    }
    let seed = cfg.seeds[0];
    let opts = cfg.env_options(seed);
    let mut learn_env = AnyEnv::new(corpus, store.clone(), &opts).map_err(CliError::usage)?;
    let mut pred_env = AnyEnv::new(corpus, store, &opts).map_err(CliError::usage)?;
    let mut agent = build_agent(cfg, learn_env.observation_dim(), learn_env.action_space().len(), seed)?;
    agent.plan(n * cfg.online_budget);

    let window_len = cfg.online_log_every.max(1);
    let mut scores = Vec::with_capacity(n);
    let mut running = Vec::new();
    let mut window = Vec::new();
    for i in 0..n {
        let mut policy = PolicyChoice::Greedy(agent.policy_network());
        let s = pred_env.evaluate_range(corpus, SplitName::Train, i..i + 1, &mut policy)?.mean_episode_score;
        scores.push(s);
        window.push(s);
        learn_env.add_samples(corpus, SplitName::Train, i..i + 1)?;
        learn_env.learn(&mut agent, cfg.online_budget)?;
        if window.len() == window_len {
            let m = window.iter().sum::<f64>() / window.len() as f64;
            writeln!(out, "Running match score {m}")?;
            running.push(m);
            window.clear();
        }
    }

    std::fs::create_dir_all(&cfg.output_dir)?;
    let csv = cfg.output_dir.join("online.csv");
    let mut w = csv::Writer::from_path(&csv).map_err(CliError::runtime)?;
    w.write_record(["sample", "score"]).map_err(CliError::runtime)?;
    for (i, s) in scores.iter().enumerate() {
        w.write_record([i.to_string(), s.to_string()]).map_err(CliError::runtime)?;
    }
    w.flush()?;
    Ok(OnlineSummary { scores, running, csv })
}
