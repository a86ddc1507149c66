//! Tabular Q-learning with robustness-of-partial-trajectory rewards.

pub mod policy;
pub mod projection;
pub mod replay;
pub mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stl::MonitorError;
use crate::world::WorldError;

pub use policy::{GreedyPolicy, Policy, PolicyFile, QFunction};
pub use projection::Projection;
pub use replay::{ReplayMemory, Transition};
pub use train::{
    evaluate, robustness_reward, train, train_with, write_curve_csv, CurvePoint, Progress, Rollout, TaskMonitor, graded_atom,
    Training,
};

#[derive(Debug, Error)]
pub enum RlError {
    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("state key does not fit in 64 bits: {0}")]
    KeyOverflow(String),
    #[error("non-finite Q update at episode {episode}, step {step}: {detail}")]
    NonFinite { episode: usize, step: usize, detail: String },
    #[error("policy file line {line}: {msg}")]
    PolicyFile { line: usize, msg: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Knobs of the training loop. `replay_threshold` is the number of stored
/// transitions that must be exceeded before any update happens;
/// `target_period` is the snapshot period in episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Hyperparams {
    pub episodes: usize,
    pub max_steps: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay: f64,
    pub replay_threshold: usize,
    pub replay_capacity: usize,
    pub target_period: usize,
    pub batch_size: usize,
    pub goal_bonus: f64,
    /// Adds `P(s') - P(s)` to each reward, where `P` is the graded
    /// robustness of the task at the current state alone.
    pub shaping: bool,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            episodes: 50_000,
            max_steps: 40,
            gamma: 0.99,
            alpha: 0.1,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: 0.9999,
            replay_threshold: 500,
            replay_capacity: 20_000,
            target_period: 50,
            batch_size: 32,
            goal_bonus: 10.0,
            shaping: true,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |m: &str| Err(RlError::Hyperparams(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must be in (0, 1]");
        }
        for e in [self.epsilon_start, self.epsilon_end] {
            if !(0.0..=1.0).contains(&e) {
                return bad("epsilon must stay in [0, 1]");
            }
        }
        if self.epsilon_end > self.epsilon_start {
            return bad("epsilon end exceeds start");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon decay must be in (0, 1]");
        }
        if self.max_steps == 0 || self.target_period == 0 || self.batch_size == 0 {
            return bad("maxSteps, target period and batch size must be positive");
        }
        if self.replay_capacity <= self.replay_threshold {
            return bad("replay capacity must exceed the training threshold");
        }
        if !self.goal_bonus.is_finite() || self.goal_bonus < 0.0 {
            return bad("goal bonus must be finite and non-negative");
        }
        Ok(())
    }

    /// Exploration rate for episode `e`.
    pub fn epsilon(&self, e: usize) -> f64 {
        (self.epsilon_start * self.epsilon_decay.powf(e as f64)).max(self.epsilon_end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let h = Hyperparams::default();
        h.validate().unwrap();
        assert_eq!(h.epsilon(0), 1.0);
        assert_eq!(h.epsilon(1_000_000), 0.05);
        assert!(h.epsilon(100) < h.epsilon(10));
    }

    #[test]
    fn rejects_bad_values() {
        for h in [
            Hyperparams { gamma: 0.0, ..Default::default() },
            Hyperparams { epsilon_start: 1.5, ..Default::default() },
            Hyperparams { epsilon_end: 0.5, epsilon_start: 0.1, ..Default::default() },
            Hyperparams { replay_capacity: 10, ..Default::default() },
            Hyperparams { max_steps: 0, ..Default::default() },
        ] {
            assert!(h.validate().is_err(), "{h:?}");
        }
    }

    #[test]
    fn json_uses_camel_case() {
        let h: Hyperparams = serde_json::from_str(r#"{"episodes": 10, "maxSteps": 5}"#).unwrap();
        assert_eq!((h.episodes, h.max_steps, h.gamma), (10, 5, 0.99));
        assert!(serde_json::from_str::<Hyperparams>(r#"{"epochs": 1}"#).is_err());
    }
}
