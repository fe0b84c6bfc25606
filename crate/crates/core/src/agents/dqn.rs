use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::AgentConfig;
use super::env::{select, Action, DiscreteEnv, PinchEnv};
use super::replay::{ReplayBuffer, Transition};
use super::{oracle_trace, CurvePoint};
use crate::neural::{argmax, Loss, MlpModel, Optimizer, OptimizerKind};
use crate::rng::{derive_seed, rng_stream, StreamRng};
use crate::{Error, Result};

/// Deep Q-learner with uniform experience replay and a hard-synced target
/// network.
#[derive(Debug, Clone)]
pub struct DqnLearner {
    pub online: MlpModel,
    pub target: MlpModel,
    optimizer: Optimizer,
    buffer: ReplayBuffer<Transition<usize>>,
    rng: StreamRng,
    cfg: AgentConfig,
    actions: usize,
    total_steps: u64,
    /// Environment steps observed.
    pub steps: u64,
    /// Gradient updates applied.
    pub updates: u64,
}

impl DqnLearner {
    /// `label` keys the learner's random streams, so learners with distinct
    /// labels in one run draw independent numbers.
    pub fn new(state_dim: usize, actions: usize, cfg: &AgentConfig, total_steps: u64, label: &str) -> Result<Self> {
        cfg.validate()?;
        if actions == 0 {
            return Err(Error::InvalidConfig("action set is empty".into()));
        }
        let online = MlpModel::new(&cfg.layers(state_dim, actions), derive_seed(cfg.seed, &format!("{label}/net")))?;
        Ok(Self {
            target: online.clone(),
            optimizer: Optimizer::new(OptimizerKind::Adam, cfg.lr, 0.0, &online),
            online,
            buffer: ReplayBuffer::new(cfg.buffer_capacity)?,
            rng: rng_stream(cfg.seed, &format!("{label}/explore")),
            cfg: cfg.clone(),
            actions,
            total_steps,
            steps: 0,
            updates: 0,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon(self.steps, self.total_steps)
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.online.forward(state)
    }

    pub fn greedy(&self, state: &[f64]) -> Result<usize> {
        self.online.argmax(state)
    }

    /// ε-greedy action for the current step.
    pub fn act(&mut self, state: &[f64]) -> Result<usize> {
        if self.rng.random::<f64>() < self.epsilon() {
            Ok(self.rng.random_range(0..self.actions))
        } else {
            self.greedy(state)
        }
    }

    /// Stores a transition and runs one update.
    pub fn observe(&mut self, t: Transition<usize>) -> Result<bool> {
        self.buffer.push(t);
        self.steps += 1;
        self.train_step()
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    /// One minibatch update on the Huber TD error. Does nothing and returns
    /// `false` until the buffer holds `min_fill` transitions.
    pub fn train_step(&mut self) -> Result<bool> {
        if self.buffer.len() < self.cfg.min_fill.max(1) {
            return Ok(false);
        }
        let batch = self.buffer.sample_indices(&mut self.rng, self.cfg.batch);
        let scale = 1.0 / batch.len() as f64;
        let mut grads = vec![0.0; self.online.params.len()];
        let mut d_out = vec![0.0; self.actions];
        for i in batch {
            let t = self.buffer.get(i).ok_or(Error::EmptyBatch)?;
            let mut y = t.reward * self.cfg.reward_scale;
            if !t.done && self.cfg.gamma > 0.0 {
                let next = self.target.forward(&t.next_state)?;
                y += self.cfg.gamma * next[argmax(&next)];
            }
            let trace = self.online.forward_trace(&t.state)?;
            let q = trace.output()[t.action];
            let (_, g) = Loss::Huber.value_and_grad(&[q], &[y]);
            d_out.iter_mut().for_each(|d| *d = 0.0);
            d_out[t.action] = g[0] * scale;
            self.online.backward(&trace, &d_out, &mut grads);
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss);
        }
        self.optimizer.step(&mut self.online, &grads);
        self.updates += 1;
        if self.updates.is_multiple_of(self.cfg.target_sync as u64) {
            self.target.clone_from(&self.online);
        }
        Ok(true)
    }
}

/// Greedy joint policy: agent `w` sees only `state[observations[w]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePolicy {
    pub nets: Vec<MlpModel>,
    pub observations: Vec<Vec<usize>>,
}

impl DiscretePolicy {
    pub fn act(&self, state: &[f64]) -> Result<Vec<usize>> {
        self.nets
            .iter()
            .zip(&self.observations)
            .map(|(net, obs)| net.argmax(&select(state, obs)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct DqnOutcome {
    pub learners: Vec<DqnLearner>,
    pub policy: DiscretePolicy,
    pub curve: Vec<CurvePoint>,
}

/// Mean per-step objective, mean per-step sum rate and the objective ratio
/// to the per-step oracle over one greedy episode.
pub fn evaluate_discrete(env: &mut PinchEnv, policy: &DiscretePolicy, oracle: &[f64]) -> Result<(f64, f64, f64)> {
    let mut state = env.reset();
    let (mut reward, mut rate, mut best) = (0.0, 0.0, 0.0);
    for &o in oracle {
        let step = env.step(&Action::Discrete(policy.act(&state)?))?;
        reward += step.reward;
        rate += step.sum_rate;
        best += o;
        state = step.state;
    }
    let n = oracle.len() as f64;
    Ok((reward / n, rate / n, ratio(reward, best)))
}

pub(crate) fn ratio(achieved: f64, best: f64) -> f64 {
    if best == 0.0 {
        if achieved == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        achieved / best
    }
}

/// Independent deep Q-learners, one per waveguide, trained on the shared
/// global reward from their local observations. A single waveguide gives
/// plain DQN.
pub fn train_madqn(env: &mut PinchEnv, cfg: &AgentConfig, episodes: usize) -> Result<DqnOutcome> {
    cfg.validate()?;
    let k = env.agents();
    let total = (episodes * env.horizon) as u64;
    let observations: Vec<Vec<usize>> = (0..k).map(|w| env.observation_indices(w)).collect();
    let mut learners = (0..k)
        .map(|w| DqnLearner::new(observations[w].len(), env.candidates(w).len(), cfg, total, &format!("dqn/{w}")))
        .collect::<Result<Vec<_>>>()?;
    let oracle = oracle_trace(env)?;
    let mut curve = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let mut state = env.reset();
        let mut total_reward = 0.0;
        for _ in 0..env.horizon {
            let locals: Vec<Vec<f64>> = observations.iter().map(|o| select(&state, o)).collect();
            let joint = learners
                .iter_mut()
                .zip(&locals)
                .map(|(l, s)| l.act(s))
                .collect::<Result<Vec<usize>>>()?;
            let step = env.step(&Action::Discrete(joint.clone()))?;
            total_reward += step.reward;
            for (w, learner) in learners.iter_mut().enumerate() {
                learner.observe(Transition {
                    state: locals[w].clone(),
                    action: joint[w],
                    reward: step.reward,
                    next_state: select(&step.state, &observations[w]),
                    done: step.terminal,
                })?;
            }
            state = step.state;
        }
        let policy = DiscretePolicy { nets: learners.iter().map(|l| l.online.clone()).collect(), observations: observations.clone() };
        let (_, eval_rate, oracle_ratio) = evaluate_discrete(env, &policy, &oracle)?;
        curve.push(CurvePoint { episode, mean_reward: total_reward / env.horizon as f64, eval_rate, oracle_ratio });
    }
    let policy = DiscretePolicy { nets: learners.iter().map(|l| l.online.clone()).collect(), observations };
    env.reset();
    Ok(DqnOutcome { learners, policy, curve })
}

/// Single-agent DQN over a one-waveguide environment.
pub fn train_dqn(env: &mut PinchEnv, cfg: &AgentConfig, episodes: usize) -> Result<DqnOutcome> {
    if env.agents() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, actual: env.agents() });
    }
    train_madqn(env, cfg, episodes)
}

/// Runs `episodes` ε-greedy episodes of a generic discrete environment and
/// returns the total reward per episode.
pub fn run_discrete<E: DiscreteEnv>(env: &mut E, learner: &mut DqnLearner, episodes: usize) -> Result<Vec<f64>> {
    let mut totals = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut state = env.reset();
        let mut total = 0.0;
        loop {
            let action = learner.act(&state)?;
            let step = env.step(action)?;
            total += step.reward;
            learner.observe(Transition {
                state,
                action,
                reward: step.reward,
                next_state: step.state.clone(),
                done: step.terminal,
            })?;
            state = step.state;
            if step.done {
                break;
            }
        }
        totals.push(total);
    }
    Ok(totals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::env::Step;

    /// One-step bandit: action 1 pays 1, action 0 pays 0.
    struct Bandit;

    impl DiscreteEnv for Bandit {
        fn state_dim(&self) -> usize {
            1
        }
        fn action_count(&self) -> usize {
            2
        }
        fn reset(&mut self) -> Vec<f64> {
            vec![1.0]
        }
        fn step(&mut self, action: usize) -> Result<Step> {
            let reward = action as f64;
            Ok(Step { state: vec![1.0], reward, sum_rate: reward, done: true, terminal: true })
        }
    }

    fn bandit_cfg() -> AgentConfig {
        AgentConfig {
            gamma: 0.0,
            hidden: vec![16],
            batch: 16,
            min_fill: 16,
            buffer_capacity: 1000,
            lr: 5e-3,
            target_sync: 10,
            reward_scale: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn bandit_q_values_reach_the_fixed_point() {
        let cfg = bandit_cfg();
        let mut learner = DqnLearner::new(1, 2, &cfg, 2000, "bandit").unwrap();
        run_discrete(&mut Bandit, &mut learner, 2000).unwrap();
        let q = learner.q_values(&[1.0]).unwrap();
        assert!(q[0].abs() < 0.05 && (q[1] - 1.0).abs() < 0.05, "{q:?}");
        assert_eq!(learner.greedy(&[1.0]).unwrap(), 1);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let cfg = AgentConfig { eps_start: 1.0, eps_end: 1.0, ..bandit_cfg() };
        let mut learner = DqnLearner::new(1, 2, &cfg, 10_000, "uniform").unwrap();
        let ones: usize = (0..10_000).map(|_| learner.act(&[1.0]).unwrap()).sum();
        // Binomial(10⁴, ½): σ = 50.
        assert!((ones as f64 - 5000.0).abs() <= 150.0, "{ones}");
    }

    #[test]
    fn no_update_before_minimum_fill() {
        let cfg = AgentConfig { min_fill: 32, ..bandit_cfg() };
        let mut learner = DqnLearner::new(1, 2, &cfg, 100, "fill").unwrap();
        let before = learner.online.clone();
        for _ in 0..31 {
            let t = Transition { state: vec![1.0], action: 1, reward: 1.0, next_state: vec![1.0], done: true };
            assert!(!learner.observe(t).unwrap());
        }
        assert_eq!(learner.online, before);
        assert_eq!(learner.updates, 0);
    }

    #[test]
    fn target_changes_only_at_sync_steps() {
        let cfg = AgentConfig { target_sync: 7, ..bandit_cfg() };
        let mut learner = DqnLearner::new(1, 2, &cfg, 500, "sync").unwrap();
        let mut last = learner.target.clone();
        let mut syncs = 0;
        for i in 0..200 {
            let t = Transition { state: vec![1.0], action: i % 2, reward: (i % 2) as f64, next_state: vec![1.0], done: true };
            let updated = learner.observe(t).unwrap();
            if learner.target != last {
                assert!(updated && learner.updates.is_multiple_of(7));
                assert_eq!(learner.target, learner.online);
                syncs += 1;
                last = learner.target.clone();
            }
        }
        assert!(syncs > 20);
    }

    #[test]
    fn training_is_reproducible() {
        let cfg = AgentConfig { horizon: 4, hidden: vec![16], ..Default::default() };
        let run = || {
            let mut env = PinchEnv::from_scenario(crate::presets::ScenarioId::B, 1, &cfg).unwrap();
            train_dqn(&mut env, &cfg, 30).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.policy, b.policy);
    }
}
