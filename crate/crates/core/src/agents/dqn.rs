use rand::Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{AgentKind, Checkpoint, NetworkState};
use super::mlp::{argmax, clip_grad_norm, Activation, Mlp};
use super::replay::{ReplayBuffer, Transition};
use super::{task_network, Adam, Agent, EpisodeTracker};
use crate::env::{Environment, Task};
use crate::error::{Error, Result};
use crate::rng::{RunRng, Stream, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub buffer_size: usize,
    pub learning_starts: usize,
    pub train_freq: usize,
    pub target_update_interval: usize,
    pub exploration_fraction: f64,
    pub exploration_initial_eps: f64,
    pub exploration_final_eps: f64,
    pub max_grad_norm: f64,
    pub double_q: bool,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self::for_task(Task::SeqTag)
    }
}

impl DqnConfig {
    pub fn for_task(task: Task) -> Self {
        let (hidden, learning_rate) = task_network(task);
        Self {
            hidden,
            activation: Activation::Relu,
            learning_rate,
            gamma: 0.99,
            batch_size: 32,
            buffer_size: 50_000,
            learning_starts: 1000,
            train_freq: 1,
            target_update_interval: 500,
            exploration_fraction: 0.1,
            exploration_initial_eps: 1.0,
            exploration_final_eps: 0.02,
            max_grad_norm: 10.0,
            double_q: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("dqn: {m}")));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.exploration_final_eps >= 0.0
            && self.exploration_final_eps <= self.exploration_initial_eps
            && self.exploration_initial_eps <= 1.0)
        {
            return bad("need 0 <= exploration_final_eps <= exploration_initial_eps <= 1");
        }
        if self.batch_size == 0 || self.buffer_size == 0 || self.train_freq == 0 || self.target_update_interval == 0 {
            return bad("batch_size, buffer_size, train_freq and target_update_interval must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// Bootstrapped Q target. With `double_q` the online network picks the next
/// action and the target network scores it.
pub fn dqn_target(
    reward: f64,
    done: bool,
    q_next_online: &[f64],
    q_next_target: &[f64],
    gamma: f64,
    double_q: bool,
) -> Result<f64> {
    if q_next_online.is_empty() || q_next_online.len() != q_next_target.len() {
        return Err(Error::DimensionMismatch {
            expected: q_next_online.len().max(1),
            found: q_next_target.len(),
        });
    }
    if done {
        return Ok(reward);
    }
    let next = if double_q {
        q_next_target[argmax(q_next_online)]
    } else {
        q_next_target.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(reward + gamma * next)
}

fn huber_grad(diff: f64) -> f64 {
    diff.clamp(-1.0, 1.0)
}

#[derive(Debug, Clone)]
pub struct DqnAgent {
    config: DqnConfig,
    seed: u64,
    online: Mlp,
    target: Mlp,
    adam: Adam,
    replay: ReplayBuffer,
    rng: StreamRng,
    tracker: EpisodeTracker,
    steps: usize,
    planned: usize,
    updates: usize,
    grads: Vec<f64>,
}

impl DqnAgent {
    pub fn new(obs_dim: usize, n_actions: usize, config: DqnConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let run = RunRng::new(seed);
        let mut sizes = vec![obs_dim];
        sizes.extend(&config.hidden);
        sizes.push(n_actions);
        let online = Mlp::new(&sizes, config.activation, &mut run.stream(Stream::Init))?;
        Ok(Self {
            adam: Adam::new(online.n_params(), config.learning_rate),
            grads: vec![0.0; online.n_params()],
            target: online.clone(),
            online,
            replay: ReplayBuffer::new(config.buffer_size),
            rng: run.stream(Stream::Agent),
            tracker: EpisodeTracker::default(),
            steps: 0,
            planned: 0,
            updates: 0,
            config,
            seed,
        })
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn online(&self) -> &Mlp {
        &self.online
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    /// Exploration rate at the current step.
    pub fn epsilon(&self) -> f64 {
        let c = &self.config;
        let span = c.exploration_fraction * self.planned as f64;
        let progress = if span > 0.0 {
            (self.steps as f64 / span).min(1.0)
        } else {
            1.0
        };
        c.exploration_initial_eps + progress * (c.exploration_final_eps - c.exploration_initial_eps)
    }

    fn train_batch(&mut self) -> Result<()> {
        let c = &self.config;
        let batch = self.replay.sample_indices(&mut self.rng, c.batch_size);
        let n = batch.len() as f64;
        self.grads.iter_mut().for_each(|g| *g = 0.0);
        let mut upstream = vec![0.0; self.online.output_size()];
        for &ix in &batch {
            let t: &Transition = self.replay.get(ix);
            let y = if t.done {
                t.reward
            } else {
                let qo = self.online.forward(&t.next_obs)?;
                let qt = self.target.forward(&t.next_obs)?;
                dqn_target(t.reward, false, &qo, &qt, c.gamma, c.double_q)?
            };
            let cache = self.online.forward_cached(&t.obs)?;
            let diff = cache.output()[t.action] - y;
            if !diff.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "non-finite TD error at step {} (target {y})",
                    self.steps
                )));
            }
            upstream.iter_mut().for_each(|u| *u = 0.0);
            upstream[t.action] = huber_grad(diff) / n;
            self.online.backward(&cache, &upstream, &mut self.grads)?;
        }
        clip_grad_norm(&mut [&mut self.grads], c.max_grad_norm);
        self.adam.step(self.online.params_mut(), &self.grads);
        self.updates += 1;
        Ok(())
    }
}

impl Agent for DqnAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::Dqn
    }

    fn plan(&mut self, total_steps: usize) {
        self.planned = total_steps;
    }

    fn learn<E: Environment>(&mut self, env: &mut E, steps: usize) -> Result<()> {
        if self.planned == 0 {
            self.planned = self.steps + steps;
        }
        let n_actions = env.action_space().len();
        if n_actions != self.online.output_size() || env.observation_dim() != self.online.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.online.input_size(),
                found: env.observation_dim(),
            });
        }
        for _ in 0..steps {
            let obs = self.tracker.current(env)?;
            let action = if self.rng.random::<f64>() < self.epsilon() {
                self.rng.random_range(0..n_actions)
            } else {
                argmax(&self.online.forward(&obs)?)
            };
            let r = env.step(action)?;
            self.tracker.record(&r);
            self.replay.push(Transition {
                obs,
                action,
                reward: r.reward,
                next_obs: r.observation.values,
                done: r.done,
            });
            self.steps += 1;
            if self.steps > self.config.learning_starts && self.steps % self.config.train_freq == 0 {
                self.train_batch()?;
            }
            if self.steps % self.config.target_update_interval == 0 {
                self.target.params_mut().copy_from_slice(self.online.params());
            }
        }
        Ok(())
    }

    fn steps_done(&self) -> usize {
        self.steps
    }

    fn episode_returns(&self) -> &[f64] {
        self.tracker.returns()
    }

    fn policy_network(&self) -> &Mlp {
        &self.online
    }

    fn checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::new(AgentKind::Dqn, self.seed, self.steps, &self.config);
        ck.networks.insert("q".into(), NetworkState::from(&self.online));
        ck.networks.insert("q_target".into(), NetworkState::from(&self.target));
        ck.optimizers.insert("q".into(), self.adam.clone());
        ck
    }
}
