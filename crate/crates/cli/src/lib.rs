//! Command implementations behind the `textgym` binary.

pub mod config;
pub mod eval;
pub mod online;
pub mod play;
pub mod serve;
pub mod synth;
pub mod train;

use std::fmt;

use textgym::agents::{AgentKind, AnyAgent, DqnAgent, PpoAgent};

pub use config::RunConfig;

/// Failure of a command, split by exit code: 2 for bad usage or configuration
/// (including unreadable inputs), 1 for failures while running.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn usage(e: impl fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn runtime(e: impl fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<textgym::Error> for CliError {
    fn from(e: textgym::Error) -> Self {
        CliError::runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(e)
    }
}

/// Fresh learner for `cfg.agent`.
pub fn build_agent(cfg: &RunConfig, obs_dim: usize, n_actions: usize, seed: u64) -> Result<AnyAgent, CliError> {
    Ok(match cfg.agent {
        AgentKind::Dqn => AnyAgent::Dqn(DqnAgent::new(obs_dim, n_actions, cfg.dqn_config(), seed).map_err(CliError::usage)?),
        AgentKind::Ppo => AnyAgent::Ppo(PpoAgent::new(obs_dim, n_actions, cfg.ppo_config(), seed).map_err(CliError::usage)?),
        AgentKind::Oracle => return Err(CliError::usage("the oracle agent does not learn; use dqn or ppo")),
    })
}
