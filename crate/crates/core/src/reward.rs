//! Default F1 rewards.

use crate::env::{RewardFlavor, RewardFunction, RewardInput};
use crate::metrics::{set_f1, token_f1};

/// Token-level micro F1 against the equally long prefix of the targets.
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenF1Reward {
    pub flavor: RewardFlavor,
}

impl TokenF1Reward {
    pub fn new(flavor: RewardFlavor) -> Self {
        Self { flavor }
    }

    fn score(targets: &[String], predicted: &[String]) -> f64 {
        let n = predicted.len().min(targets.len());
        token_f1(&targets[..n], predicted).f1
    }
}

impl RewardFunction for TokenF1Reward {
    fn reward(&self, input: &RewardInput<'_>) -> f64 {
        match self.flavor {
            RewardFlavor::Dense => {
                Self::score(input.targets, input.current) - Self::score(input.targets, input.previous)
            }
            RewardFlavor::Sparse if input.done => Self::score(input.targets, input.current),
            RewardFlavor::Sparse => 0.0,
        }
    }
}

/// Set F1 between the oracle label set and the labels emitted so far.
#[derive(Debug, Clone, Copy, Default)]
pub struct SetF1Reward {
    pub flavor: RewardFlavor,
}

impl SetF1Reward {
    pub fn new(flavor: RewardFlavor) -> Self {
        Self { flavor }
    }
}

impl RewardFunction for SetF1Reward {
    fn reward(&self, input: &RewardInput<'_>) -> f64 {
        match self.flavor {
            RewardFlavor::Dense => {
                set_f1(input.targets, input.current).f1 - set_f1(input.targets, input.previous).f1
            }
            RewardFlavor::Sparse if input.done => set_f1(input.targets, input.current).f1,
            RewardFlavor::Sparse => 0.0,
        }
    }
}
