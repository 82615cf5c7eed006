use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::{AgentKind, Checkpoint, NetworkState};
use super::mlp::{clip_grad_norm, Activation, Mlp};
use super::{task_network, Adam, Agent, EpisodeTracker};
use crate::env::{Environment, Task};
use crate::error::{Error, Result};
use crate::rng::{RunRng, Stream, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    /// Environment steps collected per update.
    pub n_steps: usize,
    pub n_epochs: usize,
    /// Minibatch size.
    pub batch_size: usize,
    pub clip_range: f64,
    pub ent_coef: f64,
    pub vf_coef: f64,
    pub max_grad_norm: f64,
    pub normalize_advantage: bool,
    /// Scale applied to the freshly initialised policy output layer.
    pub policy_output_scale: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self::for_task(Task::SeqTag)
    }
}

impl PpoConfig {
    pub fn for_task(task: Task) -> Self {
        let (hidden, learning_rate) = task_network(task);
        Self {
            hidden,
            activation: Activation::Tanh,
            learning_rate,
            gamma: 0.99,
            gae_lambda: 0.95,
            n_steps: 256,
            n_epochs: 4,
            batch_size: 64,
            clip_range: 0.2,
            ent_coef: 0.0,
            vf_coef: 0.5,
            max_grad_norm: 0.5,
            normalize_advantage: true,
            policy_output_scale: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("ppo: {m}")));
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gamma and gae_lambda must lie in [0, 1]");
        }
        if !(self.clip_range > 0.0) {
            return bad("clip_range must be positive");
        }
        if self.n_steps == 0 || self.n_epochs == 0 || self.batch_size == 0 {
            return bad("n_steps, n_epochs and batch_size must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// `min(ρA, clip(ρ, 1-ε, 1+ε)A)`.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - clip, 1.0 + clip) * advantage)
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

/// Generalised advantage estimates and the matching value targets.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let next_value = if t + 1 < n { values[t + 1] } else { last_value };
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        running = delta + gamma * lambda * live * running;
        adv[t] = running;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Transitions collected with the current policy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rollout {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    /// Value of the observation following the last transition (0 if it ended an episode).
    pub last_value: f64,
}

impl Rollout {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    fn clear(&mut self) {
        *self = Self::default();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PpoDiagnostics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Several epochs of clipped-surrogate updates over shuffled minibatches.
#[allow(clippy::too_many_arguments)]
pub fn ppo_update<R: Rng + ?Sized>(
    policy: &mut Mlp,
    value: &mut Mlp,
    policy_opt: &mut Adam,
    value_opt: &mut Adam,
    rollout: &Rollout,
    config: &PpoConfig,
    rng: &mut R,
) -> Result<PpoDiagnostics> {
    if rollout.is_empty() {
        return Ok(PpoDiagnostics::default());
    }
    let (advantages, returns) = gae(
        &rollout.rewards,
        &rollout.values,
        &rollout.dones,
        rollout.last_value,
        config.gamma,
        config.gae_lambda,
    );
    let mut gp = vec![0.0; policy.n_params()];
    let mut gv = vec![0.0; value.n_params()];
    let mut order: Vec<usize> = (0..rollout.len()).collect();
    let mut diag = PpoDiagnostics::default();
    let mut n_batches = 0.0;
    let eps = config.clip_range;
    for _ in 0..config.n_epochs {
        order.shuffle(rng);
        for batch in order.chunks(config.batch_size) {
            let b = batch.len() as f64;
            let mut adv: Vec<f64> = batch.iter().map(|&i| advantages[i]).collect();
            if config.normalize_advantage && batch.len() > 1 {
                let mean = adv.iter().sum::<f64>() / b;
                let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (b - 1.0);
                let std = var.sqrt();
                adv.iter_mut().for_each(|a| *a = (*a - mean) / (std + 1e-8));
            }
            gp.iter_mut().for_each(|g| *g = 0.0);
            gv.iter_mut().for_each(|g| *g = 0.0);
            let (mut pl, mut vl, mut ent, mut kl, mut clipped) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (&i, &a_hat) in batch.iter().zip(&adv) {
                let action = rollout.actions[i];
                let cache = policy.forward_cached(&rollout.obs[i])?;
                let logp = log_softmax(cache.output());
                let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
                let log_ratio = logp[action] - rollout.log_probs[i];
                let ratio = log_ratio.exp();
                let entropy = -probs.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
                pl -= clipped_surrogate(ratio, a_hat, eps);
                ent += entropy;
                kl += (ratio - 1.0) - log_ratio;
                // Gradient flows only through the unclipped branch of the min.
                let unclipped = ratio * a_hat <= ratio.clamp(1.0 - eps, 1.0 + eps) * a_hat;
                if (ratio - 1.0).abs() > eps {
                    clipped += 1.0;
                }
                let coef = if unclipped { -a_hat * ratio / b } else { 0.0 };
                let upstream: Vec<f64> = probs
                    .iter()
                    .zip(&logp)
                    .enumerate()
                    .map(|(j, (&p, &l))| {
                        let onehot = if j == action { 1.0 } else { 0.0 };
                        // d(-H)/dz_j = p_j (log p_j + H)
                        coef * (onehot - p) + config.ent_coef / b * p * (l + entropy)
                    })
                    .collect();
                policy.backward(&cache, &upstream, &mut gp)?;

                let vcache = value.forward_cached(&rollout.obs[i])?;
                let diff = vcache.output()[0] - returns[i];
                vl += diff * diff;
                value.backward(&vcache, &[config.vf_coef * 2.0 * diff / b], &mut gv)?;
            }
            let loss = (pl - config.ent_coef * ent + config.vf_coef * vl) / b;
            if !loss.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "ppo loss is {loss} (policy {pl}, value {vl}, entropy {ent}) over {} samples",
                    batch.len()
                )));
            }
            clip_grad_norm(&mut [&mut gp, &mut gv], config.max_grad_norm);
            policy_opt.step(policy.params_mut(), &gp);
            value_opt.step(value.params_mut(), &gv);
            diag.policy_loss += pl / b;
            diag.value_loss += vl / b;
            diag.entropy += ent / b;
            diag.approx_kl += kl / b;
            diag.clip_fraction += clipped / b;
            n_batches += 1.0;
        }
    }
    diag.policy_loss /= n_batches;
    diag.value_loss /= n_batches;
    diag.entropy /= n_batches;
    diag.approx_kl /= n_batches;
    diag.clip_fraction /= n_batches;
    Ok(diag)
}

fn sample_categorical<R: Rng + ?Sized>(rng: &mut R, logp: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, l) in logp.iter().enumerate() {
        acc += l.exp();
        if u < acc {
            return i;
        }
    }
    logp.len() - 1
}

#[derive(Debug, Clone)]
pub struct PpoAgent {
    config: PpoConfig,
    seed: u64,
    policy: Mlp,
    value: Mlp,
    policy_opt: Adam,
    value_opt: Adam,
    rng: StreamRng,
    tracker: EpisodeTracker,
    rollout: Rollout,
    steps: usize,
    last_diagnostics: Option<PpoDiagnostics>,
}

impl PpoAgent {
    pub fn new(obs_dim: usize, n_actions: usize, config: PpoConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = RunRng::new(seed).stream(Stream::Init);
        let mut sizes = vec![obs_dim];
        sizes.extend(&config.hidden);
        let mut psizes = sizes.clone();
        psizes.push(n_actions);
        sizes.push(1);
        let mut policy = Mlp::new(&psizes, config.activation, &mut init)?;
        policy.scale_output_layer(config.policy_output_scale);
        let value = Mlp::new(&sizes, config.activation, &mut init)?;
        Ok(Self {
            policy_opt: Adam::new(policy.n_params(), config.learning_rate),
            value_opt: Adam::new(value.n_params(), config.learning_rate),
            policy,
            value,
            rng: RunRng::new(seed).stream(Stream::Agent),
            tracker: EpisodeTracker::default(),
            rollout: Rollout::default(),
            steps: 0,
            last_diagnostics: None,
            config,
            seed,
        })
    }

    pub fn config(&self) -> &PpoConfig {
        &self.config
    }

    pub fn value_network(&self) -> &Mlp {
        &self.value
    }

    pub fn last_diagnostics(&self) -> Option<PpoDiagnostics> {
        self.last_diagnostics
    }

    /// Log-probabilities of the current policy at `obs`.
    pub fn log_probs(&self, obs: &[f64]) -> Result<Vec<f64>> {
        Ok(log_softmax(&self.policy.forward(obs)?))
    }

    /// Transitions gathered since the last update.
    pub fn pending_rollout(&self) -> &Rollout {
        &self.rollout
    }

    fn update(&mut self) -> Result<()> {
        self.rollout.last_value = match self.tracker.pending() {
            Some(obs) => self.value.forward(obs)?[0],
            None => 0.0,
        };
        let diag = ppo_update(
            &mut self.policy,
            &mut self.value,
            &mut self.policy_opt,
            &mut self.value_opt,
            &self.rollout,
            &self.config,
            &mut self.rng,
        )
        .map_err(|e| match e {
            Error::NumericalFailure(m) => Error::NumericalFailure(format!("{m} after {} env steps", self.steps)),
            other => other,
        })?;
        log::debug!("ppo update at step {}: {diag:?}", self.steps);
        self.last_diagnostics = Some(diag);
        self.rollout.clear();
        Ok(())
    }
}

impl Agent for PpoAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::Ppo
    }

    fn plan(&mut self, _total_steps: usize) {}

    fn learn<E: Environment>(&mut self, env: &mut E, steps: usize) -> Result<()> {
        if env.action_space().len() != self.policy.output_size() || env.observation_dim() != self.policy.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.policy.input_size(),
                found: env.observation_dim(),
            });
        }
        for _ in 0..steps {
            let obs = self.tracker.current(env)?;
            let logp = log_softmax(&self.policy.forward(&obs)?);
            let action = sample_categorical(&mut self.rng, &logp);
            let v = self.value.forward(&obs)?[0];
            let r = env.step(action)?;
            self.tracker.record(&r);
            self.rollout.obs.push(obs);
            self.rollout.actions.push(action);
            self.rollout.log_probs.push(logp[action]);
            self.rollout.values.push(v);
            self.rollout.rewards.push(r.reward);
            self.rollout.dones.push(r.done);
            self.steps += 1;
            if self.rollout.len() >= self.config.n_steps {
                self.update()?;
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
        &self.policy
    }

    fn checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::new(AgentKind::Ppo, self.seed, self.steps, &self.config);
        ck.networks.insert("policy".into(), NetworkState::from(&self.policy));
        ck.networks.insert("value".into(), NetworkState::from(&self.value));
        ck.optimizers.insert("policy".into(), self.policy_opt.clone());
        ck.optimizers.insert("value".into(), self.value_opt.clone());
        ck
    }
}
