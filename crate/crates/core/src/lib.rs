//! Reinforcement-learning environments over annotated text: sequence tagging,
//! multi-label classification and multiple-choice question answering, with
//! baseline DQN and PPO learners.
//!
//! ```
//! use std::sync::Arc;
//! use textgym::{EmbeddingStore, EnvConfig, Environment, Sample, SeqTagEnv};
//!
//! let store = Arc::new(EmbeddingStore::hashed(8, 0));
//! let mut env = SeqTagEnv::new(&["LOC", "O"], store, EnvConfig::default()).unwrap();
//! let sample = Sample::tagged("s0", vec!["BEIJING", "1996-12-06"], vec!["LOC", "O"]).unwrap();
//! env.reset(Some(sample)).unwrap();
//! let loc = env.action_space().action_to_ix("LOC").unwrap();
//! let o = env.action_space().action_to_ix("O").unwrap();
//! env.step(loc).unwrap();
//! let last = env.step(o).unwrap();
//! assert!(last.done);
//! assert_eq!(env.total_reward(), 1.0);
//! ```

pub mod agents;
pub mod datasets;
pub mod env;
pub mod envs;
mod error;
pub mod factory;
pub mod featurize;
pub mod metrics;
pub mod pool;
pub mod reward;
pub mod rng;
pub mod sample;
pub mod space;

pub use env::{EnvConfig, Environment, EpisodeOutcome, Observation, RewardFlavor, StepResult, Task};
pub use envs::{MlcEnv, QaEnv, SeqTagEnv};
pub use error::{Error, Result};
pub use factory::{AnyEnv, EnvOptions, FeaturizerKind};
pub use featurize::{EmbeddingStore, FeatureVector, Layout, OovPolicy};
pub use pool::DataPool;
pub use sample::{InputText, QaSample, Sample};
pub use space::ActionSpace;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
