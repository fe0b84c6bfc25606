use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::config::AgentConfig;
use crate::geometry::Point3;
use crate::presets::{self, ScenarioId};
use crate::propagation::los_blocked;
use crate::rates::{evaluate_at, Assignment, PowerAllocation, RateReport};
use crate::scenario::{candidate_positions, user_velocity_at, PinchConfiguration, ScenarioConfig};
use crate::search::qos_shortfall;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    /// Candidate index per waveguide.
    Discrete(Vec<usize>),
    /// Displacement per waveguide, metres; clipped to the step bound.
    Continuous(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: Vec<f64>,
    pub reward: f64,
    pub sum_rate: f64,
    pub done: bool,
    /// The episode ended in an absorbing state rather than by running out
    /// of time; only then do value targets stop bootstrapping.
    pub terminal: bool,
}

/// Environment with a single discrete action channel.
pub trait DiscreteEnv {
    fn state_dim(&self) -> usize;
    fn action_count(&self) -> usize;
    fn reset(&mut self) -> Vec<f64>;
    fn step(&mut self, action: usize) -> Result<Step>;
}

/// Pinching-antenna placement as a sequential decision problem.
///
/// One antenna per waveguide. A step applies the action, scores the new
/// placement against the users' current positions (sum rate minus
/// `μ · Σ max(0, qos_k − rate_k)`), then advances mobile users by one tick.
///
/// State layout, all features finite:
/// * per user: `x/W, y/D, z/H, qos`
/// * per waveguide: `s/L`
/// * per user, waveguide and candidate: 1 if the path is blocked
/// * per user: `vx/v_max, vy/v_max` (zero for static users)
#[derive(Debug, Clone)]
pub struct PinchEnv {
    pub config: ScenarioConfig,
    pub assignment: Assignment,
    pub power: PowerAllocation,
    pub horizon: usize,
    pub mu: f64,
    pub tick_seconds: f64,
    pub max_step_fraction: f64,
    candidates: Vec<Vec<f64>>,
    coords: Vec<f64>,
    step_index: usize,
}

impl PinchEnv {
    pub fn new(config: ScenarioConfig, cfg: &AgentConfig) -> Result<Self> {
        cfg.validate()?;
        if config.waveguides.is_empty() || config.users.is_empty() {
            return Err(Error::InvalidConfig("environment needs users and waveguides".into()));
        }
        let assignment = Assignment::nearest(&config);
        let power = PowerAllocation::equal_split(&config, &assignment);
        let candidates = config.waveguides.iter().map(candidate_positions).collect();
        let mut env = Self {
            config,
            assignment,
            power,
            horizon: cfg.horizon,
            mu: cfg.mu,
            tick_seconds: cfg.tick_seconds,
            max_step_fraction: cfg.max_step_fraction,
            candidates,
            coords: Vec::new(),
            step_index: 0,
        };
        env.reset();
        Ok(env)
    }

    /// Preset scenario `id` drawn from `seed`.
    pub fn from_scenario(id: ScenarioId, seed: u64, cfg: &AgentConfig) -> Result<Self> {
        Self::new(presets::scenario(id, seed), cfg)
    }

    pub fn agents(&self) -> usize {
        self.config.waveguides.len()
    }

    pub fn candidates(&self, waveguide: usize) -> &[f64] {
        &self.candidates[waveguide]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.tick_seconds
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Users back at time 0, every antenna at the grid point closest to its
    /// waveguide's midpoint.
    pub fn reset(&mut self) -> Vec<f64> {
        self.step_index = 0;
        self.coords = self
            .config
            .waveguides
            .iter()
            .zip(&self.candidates)
            .map(|(w, c)| c[nearest_index(c, w.length / 2.0)])
            .collect();
        self.state()
    }

    pub fn positions(&self) -> Vec<Point3> {
        self.config.user_positions_at(self.time())
    }

    pub fn state(&self) -> Vec<f64> {
        let t = self.time();
        let extent = self.config.room.extent();
        let origin = self.config.room.min;
        let positions = self.positions();
        let mut s = Vec::with_capacity(self.state_dim());
        for (u, p) in self.config.users.iter().zip(&positions) {
            s.push((p.x - origin.x) / extent.x);
            s.push((p.y - origin.y) / extent.y);
            s.push((p.z - origin.z) / extent.z);
            s.push(u.qos_min_rate);
        }
        for (w, c) in self.config.waveguides.iter().zip(&self.coords) {
            s.push(c / w.length);
        }
        for p in &positions {
            for (w, cands) in self.config.waveguides.iter().zip(&self.candidates) {
                for &c in cands {
                    let blocked = los_blocked(w.point_at(c), *p, &self.config.obstacles);
                    s.push(if blocked { 1.0 } else { 0.0 });
                }
            }
        }
        for u in &self.config.users {
            let v = user_velocity_at(u, t);
            s.push(v.x / u.v_max);
            s.push(v.y / u.v_max);
        }
        s
    }

    pub fn state_dim(&self) -> usize {
        let users = self.config.users.len();
        let cands: usize = self.candidates.iter().map(Vec::len).sum();
        4 * users + self.agents() + users * cands + 2 * users
    }

    /// Indices of the state entries agent `w` observes: every user feature,
    /// its own coordinate, its own waveguide's blockage bits and the mobility
    /// features, in state order. With one waveguide this is the whole state.
    pub fn observation_indices(&self, w: usize) -> Vec<usize> {
        let users = self.config.users.len();
        let agents = self.agents();
        let cands: usize = self.candidates.iter().map(Vec::len).sum();
        let mut idx: Vec<usize> = (0..4 * users).collect();
        idx.push(4 * users + w);
        let bitmap = 4 * users + agents;
        let before: usize = self.candidates[..w].iter().map(Vec::len).sum();
        for k in 0..users {
            let row = bitmap + k * cands + before;
            idx.extend(row..row + self.candidates[w].len());
        }
        let mobility = bitmap + users * cands;
        idx.extend(mobility..mobility + 2 * users);
        idx
    }

    /// Penalized objective and report of `coords` at the current time.
    pub fn score(&self, coords: &[f64]) -> Result<(f64, RateReport)> {
        let pinch = PinchConfiguration::single(coords);
        let report = evaluate_at(&self.config, &pinch, &self.power, &self.assignment, &self.positions())?;
        let reward = report.sum_rate - self.mu * qos_shortfall(&self.config, &report);
        Ok((reward, report))
    }

    pub fn step(&mut self, action: &Action) -> Result<Step> {
        let k = self.agents();
        match action {
            Action::Discrete(a) => {
                if a.len() != k {
                    return Err(Error::DimensionMismatch { expected: k, actual: a.len() });
                }
                for (w, &i) in a.iter().enumerate() {
                    let n = self.candidates[w].len();
                    if i >= n {
                        return Err(Error::DimensionMismatch { expected: n, actual: i });
                    }
                    self.coords[w] = self.candidates[w][i];
                }
            }
            Action::Continuous(d) => {
                if d.len() != k {
                    return Err(Error::DimensionMismatch { expected: k, actual: d.len() });
                }
                for (w, &delta) in d.iter().enumerate() {
                    let length = self.config.waveguides[w].length;
                    let bound = self.max_step_fraction * length;
                    let delta = if delta.is_nan() { 0.0 } else { delta.clamp(-bound, bound) };
                    self.coords[w] = (self.coords[w] + delta).clamp(0.0, length);
                }
            }
        }
        let (reward, report) = self.score(&self.coords.clone())?;
        self.step_index += 1;
        Ok(Step {
            state: self.state(),
            reward,
            sum_rate: report.sum_rate,
            done: self.step_index >= self.horizon,
            terminal: false,
        })
    }

    /// Best joint grid action for the current user positions, by exhaustive
    /// search over all candidate combinations.
    pub fn oracle(&self) -> Result<(Vec<usize>, f64)> {
        let k = self.agents();
        let mut idx = vec![0usize; k];
        let mut best = (idx.clone(), f64::NEG_INFINITY);
        loop {
            let coords: Vec<f64> = idx.iter().enumerate().map(|(w, &i)| self.candidates[w][i]).collect();
            let (v, _) = self.score(&coords)?;
            if v > best.1 {
                best = (idx.clone(), v);
            }
            let mut p = k;
            loop {
                if p == 0 {
                    return Ok(best);
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < self.candidates[p].len() {
                    break;
                }
                idx[p] = 0;
            }
        }
    }
}

impl DiscreteEnv for PinchEnv {
    fn state_dim(&self) -> usize {
        PinchEnv::state_dim(self)
    }

    fn action_count(&self) -> usize {
        self.candidates[0].len()
    }

    fn reset(&mut self) -> Vec<f64> {
        PinchEnv::reset(self)
    }

    fn step(&mut self, action: usize) -> Result<Step> {
        if self.agents() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, actual: self.agents() });
        }
        PinchEnv::step(self, &Action::Discrete(vec![action]))
    }
}

pub(crate) fn nearest_index(values: &[f64], x: f64) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if (v - x).abs() < (values[best] - x).abs() { i } else { best })
}

pub fn select(values: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| values[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::evaluate;

    fn env(id: ScenarioId, seed: u64) -> PinchEnv {
        PinchEnv::from_scenario(id, seed, &AgentConfig::default()).unwrap()
    }

    #[test]
    fn reset_is_deterministic_and_seeded() {
        for id in ScenarioId::ALL {
            let mut a = env(id, 3);
            let mut b = env(id, 3);
            assert_eq!(a.reset(), b.reset());
            assert_eq!(a.state().len(), a.state_dim());
            assert!(a.state().iter().all(|v| v.is_finite()));
        }
        assert_ne!(env(ScenarioId::A, 1).reset(), env(ScenarioId::A, 2).reset());
    }

    #[test]
    fn mobility_slot_is_filled_only_for_walkers() {
        let tail = |e: &PinchEnv| e.state()[e.state_dim() - 2 * e.config.users.len()..].to_vec();
        let c = env(ScenarioId::C, 0);
        assert!(tail(&c).iter().any(|v| *v != 0.0));
        for id in [ScenarioId::A, ScenarioId::B, ScenarioId::D, ScenarioId::E, ScenarioId::F] {
            assert!(tail(&env(id, 0)).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn reward_without_penalty_is_the_sum_rate() {
        let cfg = AgentConfig { mu: 0.0, ..Default::default() };
        let mut e = PinchEnv::from_scenario(ScenarioId::E, 4, &cfg).unwrap();
        let step = e.step(&Action::Discrete(vec![2, 7])).unwrap();
        let pinch = PinchConfiguration::single(&[e.candidates(0)[2], e.candidates(1)[7]]);
        let report = evaluate(&e.config, &pinch, &e.power, &e.assignment).unwrap();
        assert_eq!(step.reward, report.sum_rate);
    }

    #[test]
    fn horizon_ends_the_episode() {
        let cfg = AgentConfig { horizon: 3, ..Default::default() };
        let mut e = PinchEnv::from_scenario(ScenarioId::B, 0, &cfg).unwrap();
        assert!(!DiscreteEnv::step(&mut e, 0).unwrap().done);
        assert!(!DiscreteEnv::step(&mut e, 1).unwrap().done);
        assert!(DiscreteEnv::step(&mut e, 2).unwrap().done);
    }

    #[test]
    fn malformed_actions_rejected() {
        let mut e = env(ScenarioId::E, 0);
        assert!(e.step(&Action::Discrete(vec![1])).is_err());
        assert!(e.step(&Action::Discrete(vec![1, 10])).is_err());
        assert!(e.step(&Action::Continuous(vec![0.1, 0.2, 0.3])).is_err());
    }

    #[test]
    fn continuous_steps_are_clipped() {
        let mut e = env(ScenarioId::C, 0);
        let start = e.coords()[0];
        e.step(&Action::Continuous(vec![100.0])).unwrap();
        assert!((e.coords()[0] - start - 1.0).abs() < 1e-12);
        for _ in 0..8 {
            e.step(&Action::Continuous(vec![-5.0])).unwrap();
        }
        assert_eq!(e.coords()[0], 0.0);
    }

    #[test]
    fn nearest_candidate_maximizes_single_user_reward() {
        let user = Point3::new(6.3, 2.0, 1.0);
        let mut e = PinchEnv::new(presets::single_link(user), &AgentConfig::default()).unwrap();
        let projection = e.config.waveguides[0].projection(user);
        let best = nearest_index(e.candidates(0), projection);
        let mut rewards = Vec::new();
        for a in 0..e.candidates(0).len() {
            e.reset();
            rewards.push(DiscreteEnv::step(&mut e, a).unwrap().reward);
        }
        let argmax = crate::neural::argmax(&rewards);
        assert_eq!(argmax, best);
        assert_eq!(e.oracle().unwrap().0, vec![best]);
    }

    #[test]
    fn local_observations_partition_private_features() {
        let e = env(ScenarioId::E, 0);
        let a = e.observation_indices(0);
        let b = e.observation_indices(1);
        let shared: Vec<usize> = a.iter().filter(|i| b.contains(i)).copied().collect();
        let users = e.config.users.len();
        assert_eq!(shared.len(), 6 * users);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        let single = env(ScenarioId::B, 0);
        assert_eq!(single.observation_indices(0), (0..single.state_dim()).collect::<Vec<_>>());
    }
}
