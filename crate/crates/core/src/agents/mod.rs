//! Baseline learners: an MLP with manual gradients, DQN and PPO.

mod adam;
mod checkpoint;
mod dqn;
mod mlp;
mod policy;
mod ppo;
mod record;
mod replay;
mod train;

pub use adam::Adam;
pub use checkpoint::{AgentKind, Checkpoint, NetworkState, CHECKPOINT_VERSION};
pub use dqn::{dqn_target, DqnAgent, DqnConfig};
pub use mlp::{argmax, clip_grad_norm, Activation, ForwardCache, Mlp};
pub use policy::{evaluate, EvalReport, GreedyPolicy, OraclePolicy, Policy, RandomPolicy};
pub use ppo::{clipped_surrogate, gae, log_softmax, ppo_update, PpoAgent, PpoConfig, PpoDiagnostics, Rollout};
pub use record::{RunRecord, RunRow};
pub use replay::{ReplayBuffer, Transition};
pub use train::{train, trailing_mean, TrainOptions};

use crate::env::{Environment, StepResult, Task};
use crate::error::Result;

/// Hidden layer widths and learning rate tuned per task.
pub fn task_network(task: Task) -> (Vec<usize>, f64) {
    match task {
        Task::SeqTag => (vec![100, 100], 5e-4),
        Task::Qa => (vec![64, 64], 1e-4),
        Task::Mlc => (vec![200, 200], 1e-3),
    }
}

/// A learner that keeps its state (networks, optimizer, buffers, the episode
/// in progress) across calls to [`Agent::learn`].
pub trait Agent {
    fn kind(&self) -> AgentKind;

    /// Total number of steps the run is expected to take; schedules scale with it.
    fn plan(&mut self, total_steps: usize);

    /// Interacts with `env` for exactly `steps` environment steps.
    fn learn<E: Environment>(&mut self, env: &mut E, steps: usize) -> Result<()>;

    fn steps_done(&self) -> usize;

    /// Returns of all completed training episodes, oldest first.
    fn episode_returns(&self) -> &[f64];

    /// Network whose argmax is the greedy action.
    fn policy_network(&self) -> &Mlp;

    fn greedy_action(&self, obs: &[f64]) -> Result<usize> {
        Ok(argmax(&self.policy_network().forward(obs)?))
    }

    fn checkpoint(&self) -> Checkpoint;
}

/// Tracks the episode in progress and completed returns.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeTracker {
    obs: Option<Vec<f64>>,
    ret: f64,
    returns: Vec<f64>,
}

impl EpisodeTracker {
    /// Current observation, resetting `env` when no episode is running.
    pub fn current<E: Environment>(&mut self, env: &mut E) -> Result<Vec<f64>> {
        if let Some(o) = &self.obs {
            if !env.is_done() {
                return Ok(o.clone());
            }
        }
        let o = env.reset(None)?.values;
        self.ret = 0.0;
        self.obs = Some(o.clone());
        Ok(o)
    }

    pub fn record(&mut self, r: &StepResult) {
        self.ret += r.reward;
        if r.done {
            self.returns.push(self.ret);
            self.ret = 0.0;
            self.obs = None;
        } else {
            self.obs = Some(r.observation.values.clone());
        }
    }

    /// Observation after the last step, if the episode continues.
    pub fn pending(&self) -> Option<&[f64]> {
        self.obs.as_deref()
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }
}

/// Either baseline behind one type.
#[derive(Debug, Clone)]
pub enum AnyAgent {
    Dqn(DqnAgent),
    Ppo(PpoAgent),
}

impl AnyAgent {
    pub fn dqn(&self) -> Option<&DqnAgent> {
        match self {
            AnyAgent::Dqn(a) => Some(a),
            AnyAgent::Ppo(_) => None,
        }
    }

    pub fn ppo(&self) -> Option<&PpoAgent> {
        match self {
            AnyAgent::Ppo(a) => Some(a),
            AnyAgent::Dqn(_) => None,
        }
    }
}

impl Agent for AnyAgent {
    fn kind(&self) -> AgentKind {
        match self {
            AnyAgent::Dqn(a) => a.kind(),
            AnyAgent::Ppo(a) => a.kind(),
        }
    }

    fn plan(&mut self, total_steps: usize) {
        match self {
            AnyAgent::Dqn(a) => a.plan(total_steps),
            AnyAgent::Ppo(a) => a.plan(total_steps),
        }
    }

    fn learn<E: Environment>(&mut self, env: &mut E, steps: usize) -> Result<()> {
        match self {
            AnyAgent::Dqn(a) => a.learn(env, steps),
            AnyAgent::Ppo(a) => a.learn(env, steps),
        }
    }

    fn steps_done(&self) -> usize {
        match self {
            AnyAgent::Dqn(a) => a.steps_done(),
            AnyAgent::Ppo(a) => a.steps_done(),
        }
    }

    fn episode_returns(&self) -> &[f64] {
        match self {
            AnyAgent::Dqn(a) => a.episode_returns(),
            AnyAgent::Ppo(a) => a.episode_returns(),
        }
    }

    fn policy_network(&self) -> &Mlp {
        match self {
            AnyAgent::Dqn(a) => a.policy_network(),
            AnyAgent::Ppo(a) => a.policy_network(),
        }
    }

    fn checkpoint(&self) -> Checkpoint {
        match self {
            AnyAgent::Dqn(a) => a.checkpoint(),
            AnyAgent::Ppo(a) => a.checkpoint(),
        }
    }
}
