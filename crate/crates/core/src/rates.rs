//! Per-user rates and system objectives on unit bandwidth.
//!
//! Access modes:
//! - `OMA`: users sharing a waveguide split time equally; waveguides are
//!   mutually orthogonal.
//! - `NOMA`: users of a waveguide are paired in id order and each pair shares
//!   one resource with SIC; pairs (and a leftover single user) split time.
//! - `MULTI_WAVEGUIDE`: all waveguides transmit at once and interfere through
//!   their cross links; users sharing a waveguide split time.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point3;
use crate::propagation::LinkState;
use crate::scenario::{nearest_waveguide, AccessMode, PinchConfiguration, ScenarioConfig};
use crate::{Error, Result};

/// `log₂(1 + p·g/σ²)`.
pub fn oma_rate(g: f64, p: f64, noise: f64) -> f64 {
    libm::log2(1.0 + p * g / noise)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaOutcome {
    /// Rates of the two users in input order.
    pub rates: [f64; 2],
    /// `sic_order[0]` is the stronger user, who cancels the other's signal.
    pub sic_order: [usize; 2],
}

/// Two-user downlink NOMA on one resource.
///
/// The stronger user (higher gain; ties go to the first user) removes the
/// weaker user's signal before decoding its own. The weaker user treats the
/// stronger user's signal as noise; its rate is also capped by what the
/// stronger user can decode of the weak message.
pub fn noma_rates(g: [f64; 2], p: [f64; 2], noise: f64) -> NomaOutcome {
    let (s, w) = if g[1] > g[0] { (1, 0) } else { (0, 1) };
    let strong = libm::log2(1.0 + p[s] * g[s] / noise);
    let weak_at_weak = libm::log2(1.0 + p[w] * g[w] / (p[s] * g[w] + noise));
    let weak_at_strong = libm::log2(1.0 + p[w] * g[s] / (p[s] * g[s] + noise));
    let mut rates = [0.0; 2];
    rates[s] = strong;
    rates[w] = weak_at_weak.min(weak_at_strong);
    NomaOutcome { rates, sic_order: [s, w] }
}

/// User-to-waveguide association.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    /// Every user goes to its closest waveguide.
    pub fn nearest(config: &ScenarioConfig) -> Self {
        Self(
            config
                .users
                .iter()
                .map(|u| nearest_waveguide(config, u.position).unwrap_or(0))
                .collect(),
        )
    }

    pub fn users_of(&self, waveguide: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(move |(_, &w)| w == waveguide).map(|(k, _)| k)
    }

    fn check(&self, config: &ScenarioConfig) -> Result<()> {
        if self.0.len() != config.users.len() {
            return Err(Error::DimensionMismatch { expected: config.users.len(), actual: self.0.len() });
        }
        for (k, &w) in self.0.iter().enumerate() {
            if w >= config.waveguides.len() {
                return Err(Error::Unassigned(k));
            }
        }
        Ok(())
    }
}

/// Transmit power per user, W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub per_user: Vec<f64>,
}

impl PowerAllocation {
    /// Each waveguide's budget split equally among its users.
    pub fn equal_split(config: &ScenarioConfig, assignment: &Assignment) -> Self {
        let budgets: Vec<f64> = config.waveguides.iter().map(|w| w.tx_power).collect();
        Self::split_budgets(&budgets, assignment)
    }

    pub fn split_budgets(budgets: &[f64], assignment: &Assignment) -> Self {
        let mut counts = vec![0usize; budgets.len()];
        for &w in &assignment.0 {
            counts[w] += 1;
        }
        Self {
            per_user: assignment.0.iter().map(|&w| budgets[w] / counts[w] as f64).collect(),
        }
    }

    pub fn zeros(users: usize) -> Self {
        Self { per_user: vec![0.0; users] }
    }

    pub fn per_waveguide(&self, assignment: &Assignment, waveguides: usize) -> Vec<f64> {
        let mut out = vec![0.0; waveguides];
        for (k, &w) in assignment.0.iter().enumerate() {
            out[w] += self.per_user[k];
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.per_user.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub per_user: Vec<f64>,
    pub sum_rate: f64,
    pub min_rate: f64,
    /// bits/s/Hz per watt.
    pub energy_efficiency: f64,
    /// Users whose rate is below their QoS floor.
    pub qos_violations: Vec<usize>,
}

/// `SINR_k = p_k·g_{k,w(k)} / (σ² + Σ_{w'≠w(k)} P_{w'}·g_{k,w'})`, where
/// `P_{w'}` is the total power radiated by waveguide `w'`.
pub fn sinr_from_links(
    config: &ScenarioConfig,
    links: &LinkState,
    assignment: &Assignment,
    power: &PowerAllocation,
) -> Result<Vec<f64>> {
    assignment.check(config)?;
    check_power(config, power)?;
    let k_wg = config.waveguides.len();
    let radiated = power.per_waveguide(assignment, k_wg);
    let noise = config.radio.noise_power_w;
    Ok((0..config.users.len())
        .map(|k| {
            let w = assignment.0[k];
            let interference: f64 = (0..k_wg)
                .filter(|&o| o != w)
                .map(|o| radiated[o] * links.gain(k, o))
                .sum();
            power.per_user[k] * links.gain(k, w) / (noise + interference)
        })
        .collect())
}

pub fn multi_waveguide_sinr(
    config: &ScenarioConfig,
    pinch: &PinchConfiguration,
    assignment: &Assignment,
    power: &PowerAllocation,
) -> Result<Vec<f64>> {
    let links = LinkState::compute(config, pinch, &config.user_positions())?;
    sinr_from_links(config, &links, assignment, power)
}

fn check_power(config: &ScenarioConfig, power: &PowerAllocation) -> Result<()> {
    if power.per_user.len() != config.users.len() {
        return Err(Error::DimensionMismatch { expected: config.users.len(), actual: power.per_user.len() });
    }
    Ok(())
}

/// Rates with users at their configured positions.
pub fn evaluate(
    config: &ScenarioConfig,
    pinch: &PinchConfiguration,
    power: &PowerAllocation,
    assignment: &Assignment,
) -> Result<RateReport> {
    evaluate_at(config, pinch, power, assignment, &config.user_positions())
}

/// Rates with users at `positions` (used by the mobility paths).
pub fn evaluate_at(
    config: &ScenarioConfig,
    pinch: &PinchConfiguration,
    power: &PowerAllocation,
    assignment: &Assignment,
    positions: &[Point3],
) -> Result<RateReport> {
    let links = LinkState::compute(config, pinch, positions)?;
    evaluate_links(config, &links, power, assignment)
}

pub fn evaluate_links(
    config: &ScenarioConfig,
    links: &LinkState,
    power: &PowerAllocation,
    assignment: &Assignment,
) -> Result<RateReport> {
    assignment.check(config)?;
    check_power(config, power)?;
    let users = config.users.len();
    let noise = config.radio.noise_power_w;
    let mut rates = vec![0.0; users];
    match config.access_mode {
        AccessMode::Oma => {
            for w in 0..config.waveguides.len() {
                let members: Vec<usize> = assignment.users_of(w).collect();
                let share = members.len() as f64;
                for &k in &members {
                    rates[k] = oma_rate(links.gain(k, w), power.per_user[k], noise) / share;
                }
            }
        }
        AccessMode::Noma => {
            for w in 0..config.waveguides.len() {
                let mut members: Vec<usize> = assignment.users_of(w).collect();
                members.sort_by_key(|&k| config.users[k].id);
                let groups = members.len().div_ceil(2) as f64;
                for pair in members.chunks(2) {
                    match *pair {
                        [a, b] => {
                            let out = noma_rates(
                                [links.gain(a, w), links.gain(b, w)],
                                [power.per_user[a], power.per_user[b]],
                                noise,
                            );
                            rates[a] = out.rates[0] / groups;
                            rates[b] = out.rates[1] / groups;
                        }
                        [a] => rates[a] = oma_rate(links.gain(a, w), power.per_user[a], noise) / groups,
                        _ => unreachable!(),
                    }
                }
            }
        }
        AccessMode::MultiWaveguide => {
            let sinr = sinr_from_links(config, links, assignment, power)?;
            let mut counts = vec![0usize; config.waveguides.len()];
            for &w in &assignment.0 {
                counts[w] += 1;
            }
            for k in 0..users {
                rates[k] = libm::log2(1.0 + sinr[k]) / counts[assignment.0[k]] as f64;
            }
        }
    }
    Ok(report(config, rates, power))
}

fn report(config: &ScenarioConfig, per_user: Vec<f64>, power: &PowerAllocation) -> RateReport {
    let sum_rate: f64 = per_user.iter().sum();
    let min_rate = per_user.iter().copied().fold(f64::INFINITY, f64::min);
    let min_rate = if per_user.is_empty() { 0.0 } else { min_rate };
    let denom = power.total() + config.circuit_power;
    let energy_efficiency = if sum_rate == 0.0 { 0.0 } else { sum_rate / denom };
    let qos_violations = per_user
        .iter()
        .enumerate()
        .filter(|(k, &r)| r < config.users[*k].qos_min_rate)
        .map(|(k, _)| k)
        .collect();
    RateReport { per_user, sum_rate, min_rate, energy_efficiency, qos_violations }
}
