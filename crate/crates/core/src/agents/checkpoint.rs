use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::mlp::{Activation, Mlp};
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Dqn,
    Ppo,
    /// Replays the environment's oracle action; has no networks.
    Oracle,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Dqn => "dqn",
            AgentKind::Ppo => "ppo",
            AgentKind::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dqn" => Ok(AgentKind::Dqn),
            "ppo" => Ok(AgentKind::Ppo),
            "oracle" => Ok(AgentKind::Oracle),
            other => Err(Error::Config(format!("unknown agent `{other}` (expected dqn or ppo)"))),
        }
    }
}

/// Layer sizes, activation and row-major parameters of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub sizes: Vec<usize>,
    pub activation: Activation,
    pub params: Vec<f64>,
}

impl From<&Mlp> for NetworkState {
    fn from(net: &Mlp) -> Self {
        Self {
            sizes: net.sizes().to_vec(),
            activation: net.activation(),
            params: net.params().to_vec(),
        }
    }
}

impl NetworkState {
    pub fn to_mlp(&self) -> Result<Mlp> {
        Mlp::from_params(&self.sizes, self.activation, self.params.clone())
    }
}

/// JSON checkpoint container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub library_version: String,
    pub agent: AgentKind,
    pub seed: u64,
    pub steps: usize,
    /// Agent hyperparameters as configured.
    pub config: serde_json::Value,
    /// Free-form run context (task, featurizer, ...) filled in by the harness.
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    #[serde(default)]
    pub networks: BTreeMap<String, NetworkState>,
    #[serde(default)]
    pub optimizers: BTreeMap<String, Adam>,
}

impl Checkpoint {
    pub fn new<C: Serialize>(agent: AgentKind, seed: u64, steps: usize, config: &C) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            agent,
            seed,
            steps,
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            meta: BTreeMap::new(),
            networks: BTreeMap::new(),
            optimizers: BTreeMap::new(),
        }
    }

    pub fn oracle(seed: u64) -> Self {
        Self::new(AgentKind::Oracle, seed, 0, &serde_json::Value::Null)
    }

    /// Network used for greedy action selection; `None` for the oracle.
    pub fn policy_network(&self) -> Result<Option<Mlp>> {
        let key = match self.agent {
            AgentKind::Dqn => "q",
            AgentKind::Ppo => "policy",
            AgentKind::Oracle => return Ok(None),
        };
        let state = self
            .networks
            .get(key)
            .ok_or_else(|| Error::Config(format!("checkpoint lacks the `{key}` network")))?;
        state.to_mlp().map(Some)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Self = serde_json::from_str(text)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn json_round_trip_is_exact() {
        let net = Mlp::new(&[3, 5, 2], Activation::Relu, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let mut ck = Checkpoint::new(AgentKind::Dqn, 5, 10, &serde_json::json!({"lr": 5e-4}));
        ck.networks.insert("q".into(), NetworkState::from(&net));
        ck.optimizers.insert("q".into(), Adam::new(net.n_params(), 5e-4));
        let text = ck.to_json().unwrap();
        let back = Checkpoint::from_json(&text).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_json().unwrap(), text);
        assert_eq!(back.policy_network().unwrap().unwrap(), net);
    }

    #[test]
    fn oracle_has_no_network() {
        assert!(Checkpoint::oracle(0).policy_network().unwrap().is_none());
    }
}
