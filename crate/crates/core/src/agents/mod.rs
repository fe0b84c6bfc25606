//! Learning controllers for antenna placement and the environment they share.

pub mod actor_critic;
pub mod config;
pub mod dqn;
pub mod env;
pub mod replay;
pub mod supervised;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use actor_critic::{train_ddpg, train_maddpg, ActorCritic, ContinuousPolicy};
pub use config::AgentConfig;
pub use dqn::{train_dqn, train_madqn, DiscretePolicy, DqnLearner};
pub use env::{Action, DiscreteEnv, PinchEnv, Step};
pub use replay::{ReplayBuffer, Transition};

use crate::Result;

/// One row of a learning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    /// Mean per-step training reward.
    pub mean_reward: f64,
    /// Mean per-step sum rate of the greedy policy after the episode.
    pub eval_rate: f64,
    /// Greedy objective over the per-step grid optimum.
    pub oracle_ratio: f64,
}

/// Grid-optimal objective at every step of an episode. User motion depends on
/// time only, so this is independent of the actions taken.
pub fn oracle_trace(env: &PinchEnv) -> Result<Vec<f64>> {
    let mut probe = env.clone();
    probe.reset();
    let mut best = Vec::with_capacity(probe.horizon);
    for _ in 0..probe.horizon {
        let (idx, value) = probe.oracle()?;
        best.push(value);
        probe.step(&Action::Discrete(idx))?;
    }
    Ok(best)
}
