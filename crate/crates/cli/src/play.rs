//! `play`: run episodes and print each step.

use std::io::Write;
use std::path::PathBuf;

use rand::SeedableRng;
use textgym::agents::Checkpoint;
use textgym::datasets::SplitName;
use textgym::factory::{corpus_len, PolicyChoice};
use textgym::rng::StreamRng;
use textgym::AnyEnv;

use crate::{CliError, RunConfig};

pub struct PlayOptions {
    /// Greedy policy from this checkpoint; seeded random actions when `None`.
    pub checkpoint: Option<PathBuf>,
    pub split: SplitName,
    pub seed: u64,
    pub episodes: usize,
}

pub fn run_play<W: Write>(cfg: &RunConfig, opts: &PlayOptions, out: &mut W) -> Result<(), CliError> {
    let mut data = cfg.load_data()?;
    let store = cfg.embeddings_for(&mut data)?;
    let corpus = &data.corpus;
    if corpus_len(corpus, opts.split) == 0 {
        return Err(CliError::usage(format!("the {} split is empty", opts.split)));
    }
    let mut env = AnyEnv::from_corpus(corpus, opts.split, store, &cfg.env_options(opts.seed)).map_err(CliError::usage)?;
    let ck = match &opts.checkpoint {
        Some(p) => Some(Checkpoint::load(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let net = match &ck {
        Some(c) => c.policy_network()?,
        None => None,
    };
    let mut policy = match (&ck, &net) {
        (_, Some(n)) => PolicyChoice::Greedy(n),
        (Some(_), None) => PolicyChoice::Oracle,
        (None, None) => PolicyChoice::Random(StreamRng::seed_from_u64(opts.seed)),
    };

    for _ in 0..opts.episodes {
        let mut obs = env.reset()?;
        loop {
            let a = env.act(&mut policy, &obs)?;
            let name = env.action_space().ix_to_action(a)?.to_string();
            let r = env.step(a)?;
            writeln!(out, "{}", env.render())?;
            writeln!(out, "Action: {name}")?;
            obs = r.observation;
            if r.done {
                break;
            }
        }
        if let Some(t) = env.transcript() {
            writeln!(out, "{}", serde_json::to_string_pretty(&t).map_err(CliError::runtime)?)?;
        }
        writeln!(out, "Total reward: {:?}", env.total_reward())?;
    }
    Ok(())
}
