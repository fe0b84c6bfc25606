use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[allow(unused_imports)]
use num_traits::Float;

use super::config::AgentConfig;
use super::dqn::ratio;
use super::env::{select, Action, PinchEnv};
use super::replay::{ReplayBuffer, Transition};
use super::{oracle_trace, CurvePoint};
use crate::neural::{Loss, MlpModel, Optimizer, OptimizerKind};
use crate::rng::{derive_seed, rng_stream, StreamRng};
use crate::{Error, Result};

/// Decentralized continuous policy: actor `w` maps `state[observations[w]]`
/// to a displacement in `[-bounds[w], bounds[w]]`. Holds no critic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousPolicy {
    pub actors: Vec<MlpModel>,
    pub observations: Vec<Vec<usize>>,
    pub bounds: Vec<f64>,
}

impl ContinuousPolicy {
    /// Actor outputs squashed to `[-1, 1]`.
    pub fn normalized(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.actors
            .iter()
            .zip(&self.observations)
            .map(|(actor, obs)| Ok(actor.forward(&select(state, obs))?[0].tanh()))
            .collect()
    }

    pub fn act(&self, state: &[f64]) -> Result<Vec<f64>> {
        Ok(self.normalized(state)?.iter().zip(&self.bounds).map(|(a, b)| a * b).collect())
    }
}

/// Actor-critic learner with one actor per waveguide and a single critic over
/// the full state and joint action. One waveguide gives DDPG; several give
/// MADDPG with centralized training and decentralized execution.
#[derive(Debug, Clone)]
pub struct ActorCritic {
    pub actors: Vec<MlpModel>,
    pub actor_targets: Vec<MlpModel>,
    pub critic: MlpModel,
    pub critic_target: MlpModel,
    actor_opts: Vec<Optimizer>,
    critic_opt: Optimizer,
    observations: Vec<Vec<usize>>,
    bounds: Vec<f64>,
    buffer: ReplayBuffer<Transition<Vec<f64>>>,
    rng: StreamRng,
    cfg: AgentConfig,
    total_steps: u64,
    pub steps: u64,
    pub updates: u64,
    /// Critic forward passes so far; only training touches the critic.
    pub critic_calls: u64,
}

impl ActorCritic {
    pub fn new(env: &PinchEnv, cfg: &AgentConfig, total_steps: u64) -> Result<Self> {
        cfg.validate()?;
        let k = env.agents();
        let observations: Vec<Vec<usize>> = (0..k).map(|w| env.observation_indices(w)).collect();
        let actors = observations
            .iter()
            .enumerate()
            .map(|(w, o)| MlpModel::new(&cfg.layers(o.len(), 1), derive_seed(cfg.seed, &format!("ac/actor/{w}"))))
            .collect::<Result<Vec<_>>>()?;
        let critic = MlpModel::new(&cfg.layers(env.state_dim() + k, 1), derive_seed(cfg.seed, "ac/critic"))?;
        Ok(Self {
            actor_targets: actors.clone(),
            actor_opts: actors.iter().map(|a| Optimizer::new(OptimizerKind::Adam, cfg.actor_lr, 0.0, a)).collect(),
            actors,
            critic_target: critic.clone(),
            critic_opt: Optimizer::new(OptimizerKind::Adam, cfg.critic_lr, 0.0, &critic),
            critic,
            bounds: env.config.waveguides.iter().map(|w| cfg.max_step_fraction * w.length).collect(),
            observations,
            buffer: ReplayBuffer::new(cfg.buffer_capacity)?,
            rng: rng_stream(cfg.seed, "ac/explore"),
            cfg: cfg.clone(),
            total_steps,
            steps: 0,
            updates: 0,
            critic_calls: 0,
        })
    }

    pub fn policy(&self) -> ContinuousPolicy {
        ContinuousPolicy { actors: self.actors.clone(), observations: self.observations.clone(), bounds: self.bounds.clone() }
    }

    /// Exploratory action in normalized units: actor output plus Gaussian
    /// noise of `σ·L / bound`, clipped to `[-1, 1]`.
    pub fn explore(&mut self, state: &[f64]) -> Result<Vec<f64>> {
        let sigma = self.cfg.noise(self.steps, self.total_steps) / self.cfg.max_step_fraction;
        let mut a = self.policy_normalized(state)?;
        for v in &mut a {
            if sigma > 0.0 {
                let z: f64 = self.rng.sample(StandardNormal);
                *v += sigma * z;
            }
            *v = v.clamp(-1.0, 1.0);
        }
        Ok(a)
    }

    fn policy_normalized(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.actors
            .iter()
            .zip(&self.observations)
            .map(|(actor, obs)| Ok(actor.forward(&select(state, obs))?[0].tanh()))
            .collect()
    }

    pub fn to_displacement(&self, normalized: &[f64]) -> Vec<f64> {
        normalized.iter().zip(&self.bounds).map(|(a, b)| a * b).collect()
    }

    /// Stores a transition (action in normalized units) and runs one update.
    pub fn observe(&mut self, t: Transition<Vec<f64>>) -> Result<bool> {
        self.buffer.push(t);
        self.steps += 1;
        self.train_step()
    }

    fn critic_input(state: &[f64], action: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(state.len() + action.len());
        x.extend_from_slice(state);
        x.extend_from_slice(action);
        x
    }

    pub fn train_step(&mut self) -> Result<bool> {
        if self.buffer.len() < self.cfg.min_fill.max(1) {
            return Ok(false);
        }
        let batch = self.buffer.sample_indices(&mut self.rng, self.cfg.batch);
        let scale = 1.0 / batch.len() as f64;
        let k = self.actors.len();
        let state_dim = self.critic.inputs() - k;

        let mut critic_grads = vec![0.0; self.critic.params.len()];
        for &i in &batch {
            let t = self.buffer.get(i).ok_or(Error::EmptyBatch)?;
            let mut y = t.reward * self.cfg.reward_scale;
            if !t.done {
                let next_action: Vec<f64> = self
                    .actor_targets
                    .iter()
                    .zip(&self.observations)
                    .map(|(a, o)| Ok(a.forward(&select(&t.next_state, o))?[0].tanh()))
                    .collect::<Result<_>>()?;
                let q_next = self.critic_target.forward(&Self::critic_input(&t.next_state, &next_action))?[0];
                self.critic_calls += 1;
                y += self.cfg.gamma * q_next;
            }
            let trace = self.critic.forward_trace(&Self::critic_input(&t.state, &t.action))?;
            self.critic_calls += 1;
            let (_, g) = Loss::Mse.value_and_grad(trace.output(), &[y]);
            self.critic.backward(&trace, &[g[0] * scale], &mut critic_grads);
        }

        let mut actor_grads: Vec<Vec<f64>> = self.actors.iter().map(|a| vec![0.0; a.params.len()]).collect();
        let mut sink = vec![0.0; self.critic.params.len()];
        for &i in &batch {
            let t = self.buffer.get(i).ok_or(Error::EmptyBatch)?;
            let traces = self
                .actors
                .iter()
                .zip(&self.observations)
                .map(|(a, o)| a.forward_trace(&select(&t.state, o)))
                .collect::<Result<Vec<_>>>()?;
            let action: Vec<f64> = traces.iter().map(|tr| tr.output()[0].tanh()).collect();
            let trace = self.critic.forward_trace(&Self::critic_input(&t.state, &action))?;
            self.critic_calls += 1;
            let d_input = self.critic.backward(&trace, &[1.0], &mut sink);
            for w in 0..k {
                let dq_da = d_input[state_dim + w];
                // Ascend Q, L = -Q(s, tanh o) + λ·o².
                let o = traces[w].output()[0];
                let d_out = (-dq_da * (1.0 - action[w] * action[w]) + 2.0 * self.cfg.action_penalty * o) * scale;
                self.actors[w].backward(&traces[w], &[d_out], &mut actor_grads[w]);
            }
        }
        if critic_grads.iter().chain(actor_grads.iter().flatten()).any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss);
        }
        self.critic_opt.step(&mut self.critic, &critic_grads);
        for w in 0..k {
            self.actor_opts[w].step(&mut self.actors[w], &actor_grads[w]);
        }
        self.updates += 1;
        if self.updates.is_multiple_of(self.cfg.target_sync as u64) {
            self.critic_target.clone_from(&self.critic);
            for (t, a) in self.actor_targets.iter_mut().zip(&self.actors) {
                t.clone_from(a);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone)]
pub struct ActorCriticOutcome {
    pub learner: ActorCritic,
    pub policy: ContinuousPolicy,
    pub curve: Vec<CurvePoint>,
}

/// Mean per-step objective, mean per-step sum rate and objective ratio to
/// the per-step grid oracle over one deterministic episode.
pub fn evaluate_continuous(env: &mut PinchEnv, policy: &ContinuousPolicy, oracle: &[f64]) -> Result<(f64, f64, f64)> {
    let mut state = env.reset();
    let (mut reward, mut rate, mut best) = (0.0, 0.0, 0.0);
    for &o in oracle {
        let step = env.step(&Action::Continuous(policy.act(&state)?))?;
        reward += step.reward;
        rate += step.sum_rate;
        best += o;
        state = step.state;
    }
    let n = oracle.len() as f64;
    Ok((reward / n, rate / n, ratio(reward, best)))
}

/// Centralized-critic training of one actor per waveguide.
pub fn train_maddpg(env: &mut PinchEnv, cfg: &AgentConfig, episodes: usize) -> Result<ActorCriticOutcome> {
    let total = (episodes * env.horizon) as u64;
    let mut learner = ActorCritic::new(env, cfg, total)?;
    let oracle = oracle_trace(env)?;
    let mut curve = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let mut state = env.reset();
        let mut total_reward = 0.0;
        for _ in 0..env.horizon {
            let a = learner.explore(&state)?;
            let step = env.step(&Action::Continuous(learner.to_displacement(&a)))?;
            total_reward += step.reward;
            learner.observe(Transition {
                state,
                action: a,
                reward: step.reward,
                next_state: step.state.clone(),
                done: step.terminal,
            })?;
            state = step.state;
        }
        let calls = learner.critic_calls;
        let (_, eval_rate, oracle_ratio) = evaluate_continuous(env, &learner.policy(), &oracle)?;
        debug_assert_eq!(calls, learner.critic_calls);
        curve.push(CurvePoint { episode, mean_reward: total_reward / env.horizon as f64, eval_rate, oracle_ratio });
    }
    env.reset();
    Ok(ActorCriticOutcome { policy: learner.policy(), learner, curve })
}

/// DDPG: the single-waveguide case of [`train_maddpg`].
pub fn train_ddpg(env: &mut PinchEnv, cfg: &AgentConfig, episodes: usize) -> Result<ActorCriticOutcome> {
    if env.agents() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, actual: env.agents() });
    }
    train_maddpg(env, cfg, episodes)
}

/// Positions reached by rolling the policy out for `steps` steps from reset.
pub fn settle(env: &mut PinchEnv, policy: &ContinuousPolicy, steps: usize) -> Result<Vec<f64>> {
    let mut state = env.reset();
    for _ in 0..steps {
        state = env.step(&Action::Continuous(policy.act(&state)?))?.state;
    }
    let coords = env.coords().to_vec();
    env.reset();
    Ok(coords)
}
