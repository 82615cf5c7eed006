use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::mlp::{argmax, Mlp};
use crate::env::{EpisodeOutcome, Environment, Observation};
use crate::error::{Error, Result};
use crate::metrics::MicroCounts;

/// Chooses an action index from the current observation.
pub trait Policy<E: Environment + ?Sized> {
    fn act(&mut self, env: &E, obs: &Observation) -> Result<usize>;
}

/// Argmax over a network's outputs.
#[derive(Debug, Clone, Copy)]
pub struct GreedyPolicy<'a> {
    net: &'a Mlp,
}

impl<'a> GreedyPolicy<'a> {
    pub fn new(net: &'a Mlp) -> Self {
        Self { net }
    }
}

impl<E: Environment + ?Sized> Policy<E> for GreedyPolicy<'_> {
    fn act(&mut self, _env: &E, obs: &Observation) -> Result<usize> {
        Ok(argmax(&self.net.forward(&obs.values)?))
    }
}

/// Uniform over the action space.
#[derive(Debug, Clone)]
pub struct RandomPolicy<R> {
    rng: R,
}

impl<R: Rng> RandomPolicy<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }
}

impl<E: Environment + ?Sized, R: Rng> Policy<E> for RandomPolicy<R> {
    fn act(&mut self, env: &E, _obs: &Observation) -> Result<usize> {
        Ok(env.action_space().sample(&mut self.rng))
    }
}

/// Replays the oracle label of the episode in progress.
#[derive(Debug, Clone, Copy, Default)]
pub struct OraclePolicy;

impl<E: Environment + ?Sized> Policy<E> for OraclePolicy {
    fn act(&mut self, env: &E, _obs: &Observation) -> Result<usize> {
        env.oracle_action().ok_or(Error::EpisodeFinished)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric_name: String,
    /// Micro F1 over all samples (tagging, classification) or accuracy (QA).
    pub score: f64,
    /// Mean of the per-episode scores.
    pub mean_episode_score: f64,
    pub n_samples: usize,
    pub transcripts: Vec<Value>,
}

/// Runs one greedy episode per sample and scores the predictions.
pub fn evaluate<E, P>(env: &mut E, policy: &mut P, samples: &[E::Sample]) -> Result<EvalReport>
where
    E: Environment,
    P: Policy<E> + ?Sized,
{
    if samples.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let mut counts = MicroCounts::default();
    let mut correct = 0usize;
    let mut choice_task = false;
    let mut episode_sum = 0.0;
    let mut transcripts = Vec::with_capacity(samples.len());
    for sample in samples {
        let mut obs = env.reset(Some(sample.clone()))?;
        while !env.is_done() {
            let a = policy.act(env, &obs)?;
            obs = env.step(a)?.observation;
        }
        let outcome = env.outcome().ok_or(Error::EpisodeFinished)?;
        episode_sum += outcome.score();
        match outcome {
            EpisodeOutcome::Overlap { matched, predicted, actual } => counts.add(matched, predicted, actual),
            EpisodeOutcome::Choice { correct: c } => {
                choice_task = true;
                correct += usize::from(c);
            }
        }
        if let Some(t) = env.transcript() {
            transcripts.push(t);
        }
    }
    let n = samples.len();
    let score = if choice_task {
        correct as f64 / n as f64
    } else {
        counts.f1().f1
    };
    Ok(EvalReport {
        metric_name: env.task().metric_name().to_string(),
        score,
        mean_episode_score: episode_sum / n as f64,
        n_samples: n,
        transcripts,
    })
}
