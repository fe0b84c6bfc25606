use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hyper-parameters shared by every learning agent and its environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub gamma: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Fraction of all training steps over which ε decays linearly.
    pub eps_decay_fraction: f64,
    /// Hard target-network sync period, in gradient updates.
    pub target_sync: usize,
    pub buffer_capacity: usize,
    pub batch: usize,
    /// Updates start once the buffer holds this many transitions.
    pub min_fill: usize,
    pub lr: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Gaussian exploration noise, as a fraction of the waveguide length,
    /// decaying linearly from start to end over training.
    pub noise_start: f64,
    pub noise_end: f64,
    /// Largest continuous displacement per step, fraction of the length.
    pub max_step_fraction: f64,
    /// Episode length `T`.
    pub horizon: usize,
    /// QoS penalty weight `μ`.
    pub mu: f64,
    /// Simulated seconds per environment step.
    pub tick_seconds: f64,
    pub hidden: Vec<usize>,
    /// Rewards are multiplied by this before entering the learners.
    pub reward_scale: f64,
    /// Weight of the `o²` penalty on actor pre-activations, which keeps the
    /// squashing nonlinearity away from saturation.
    pub action_penalty: f64,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_fraction: 0.5,
            target_sync: 100,
            buffer_capacity: 10_000,
            batch: 64,
            min_fill: 64,
            lr: 1e-3,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            noise_start: 0.1,
            noise_end: 0.01,
            max_step_fraction: 0.1,
            horizon: 10,
            mu: 10.0,
            tick_seconds: 1.0,
            hidden: vec![64, 64],
            reward_scale: 0.1,
            action_penalty: 1e-2,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        let unit = 0.0..=1.0;
        if !unit.contains(&self.eps_start) || !unit.contains(&self.eps_end) || !unit.contains(&self.eps_decay_fraction) {
            return bad("epsilon schedule must lie in [0, 1]");
        }
        if self.target_sync == 0 {
            return bad("target sync period must be >= 1");
        }
        if self.batch == 0 || self.buffer_capacity < self.batch || self.min_fill > self.buffer_capacity {
            return bad("need 1 <= batch <= buffer capacity and min_fill <= capacity");
        }
        if self.horizon == 0 || !(self.tick_seconds > 0.0) {
            return bad("horizon and tick must be positive");
        }
        if !(self.max_step_fraction > 0.0) || self.noise_start < 0.0 || self.noise_end < 0.0 {
            return bad("step bound must be positive and noise non-negative");
        }
        if self.hidden.contains(&0) {
            return bad("hidden layers must be non-empty");
        }
        for v in [self.lr, self.actor_lr, self.critic_lr, self.mu, self.reward_scale, self.action_penalty] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad("rates, mu and reward scale must be finite and >= 0");
            }
        }
        Ok(())
    }

    /// ε after `step` of `total` steps.
    pub fn epsilon(&self, step: u64, total: u64) -> f64 {
        linear(self.eps_start, self.eps_end, step, (total as f64 * self.eps_decay_fraction) as u64)
    }

    /// Exploration noise fraction after `step` of `total` steps.
    pub fn noise(&self, step: u64, total: u64) -> f64 {
        linear(self.noise_start, self.noise_end, step, total)
    }

    /// Layer sizes `[inputs, hidden.., outputs]`.
    pub fn layers(&self, inputs: usize, outputs: usize) -> Vec<usize> {
        let mut sizes = vec![inputs];
        sizes.extend(&self.hidden);
        sizes.push(outputs);
        sizes
    }
}

fn linear(start: f64, end: f64, step: u64, span: u64) -> f64 {
    if span == 0 || step >= span {
        end
    } else {
        start + (end - start) * step as f64 / span as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        AgentConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        for cfg in [
            AgentConfig { gamma: 1.0, ..Default::default() },
            AgentConfig { eps_end: 1.5, ..Default::default() },
            AgentConfig { target_sync: 0, ..Default::default() },
            AgentConfig { batch: 0, ..Default::default() },
            AgentConfig { buffer_capacity: 8, ..Default::default() },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn epsilon_decays_over_first_half() {
        let cfg = AgentConfig::default();
        assert_eq!(cfg.epsilon(0, 1000), 1.0);
        assert!((cfg.epsilon(250, 1000) - 0.525).abs() < 1e-12);
        assert_eq!(cfg.epsilon(500, 1000), 0.05);
        assert_eq!(cfg.epsilon(999, 1000), 0.05);
        assert_eq!(cfg.noise(1000, 1000), 0.01);
    }
}
