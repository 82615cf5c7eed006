use super::record::{RunRecord, RunRow};
use super::Agent;
use crate::env::Environment;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub total_steps: usize,
    /// Environment steps between logged rows.
    pub log_every: usize,
    /// Stop once the trailing-100 mean return reaches this (after 100 episodes).
    pub target_mean_return: Option<f64>,
    /// Stop once the evaluation score reaches this.
    pub target_eval_score: Option<f64>,
}

impl TrainOptions {
    pub fn new(total_steps: usize) -> Self {
        Self {
            total_steps,
            log_every: 1000,
            target_mean_return: None,
            target_eval_score: None,
        }
    }
}

/// Mean of the last `window` values; `None` when there are none.
pub fn trailing_mean(values: &[f64], window: usize) -> Option<f64> {
    let tail = &values[values.len().saturating_sub(window)..];
    if tail.is_empty() {
        None
    } else {
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

/// Trains `agent` in chunks of `log_every` steps, logging a row after each chunk.
pub fn train<A, E, F>(agent: &mut A, env: &mut E, opts: &TrainOptions, mut eval: Option<F>) -> Result<RunRecord>
where
    A: Agent,
    E: Environment,
    F: FnMut(&A) -> Result<f64>,
{
    agent.plan(opts.total_steps);
    let mut record = RunRecord::default();
    let chunk = opts.log_every.max(1);
    let mut done = 0;
    while done < opts.total_steps {
        let n = chunk.min(opts.total_steps - done);
        agent.learn(env, n)?;
        done += n;
        let returns = agent.episode_returns();
        let mean_return = trailing_mean(returns, 100);
        let eval_score = match eval.as_mut() {
            Some(f) => Some(f(agent)?),
            None => None,
        };
        record.rows.push(RunRow {
            step: agent.steps_done(),
            mean_return,
            eval_score,
        });
        let return_hit = matches!(
            (opts.target_mean_return, mean_return),
            (Some(t), Some(m)) if returns.len() >= 100 && m >= t
        );
        let eval_hit = matches!((opts.target_eval_score, eval_score), (Some(t), Some(s)) if s >= t);
        if return_hit || eval_hit {
            break;
        }
    }
    Ok(record)
}
