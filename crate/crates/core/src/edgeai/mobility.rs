//! Serving-waveguide selection, handovers and outage for moving devices.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{pa_link_gain, spectral_efficiency};
use crate::agents::{Action, AgentConfig, ContinuousPolicy, PinchEnv};
use crate::geometry::Point3;
use crate::scenario::{PinchConfiguration, ScenarioConfig};
use crate::search::{coordinate_grid, SearchSpace};
use crate::{Error, Result};

/// How antennas follow the devices.
#[derive(Debug, Clone, Copy)]
pub enum Tracking<'a> {
    /// Antennas stay at the waveguide midpoints.
    None,
    /// Per-tick coordinate search from the midpoints.
    Grid,
    /// A trained continuous-control policy moves the antennas.
    Policy(&'a ContinuousPolicy, &'a AgentConfig),
}

impl Tracking<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Tracking::None => "NONE",
            Tracking::Grid => "GRID",
            Tracking::Policy(..) => "DDPG_POLICY",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityOptions {
    pub tick_seconds: f64,
    pub ticks: usize,
    /// Outage when the serving rate drops below this, bits/s/Hz.
    pub outage_threshold: f64,
}

impl Default for MobilityOptions {
    fn default() -> Self {
        Self { tick_seconds: 0.5, ticks: 21, outage_threshold: 12.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityTick {
    pub tick: usize,
    pub time: f64,
    pub user: usize,
    pub position: Point3,
    pub serving: usize,
    pub rate: f64,
    pub outage: bool,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityReport {
    pub ticks: Vec<MobilityTick>,
    /// Share of user-ticks in outage.
    pub outage_fraction: f64,
    pub handovers: usize,
    /// Longest run of consecutive outage ticks of any user.
    pub staleness: usize,
}

/// Per-guide gain of the active antennas toward `at`; the strongest guide
/// serves, lowest index on ties.
fn serving(config: &ScenarioConfig, pinch: &PinchConfiguration, at: Point3) -> (Option<usize>, f64) {
    let mut best = (None, 0.0);
    for w in 0..config.waveguides.len() {
        let g = pinch.active(w).map(|s| pa_link_gain(config, w, s, at)).fold(0.0, f64::max);
        if g > best.1 {
            best = (Some(w), g);
        }
    }
    best
}

fn serving_rate(config: &ScenarioConfig, pinch: &PinchConfiguration, at: Point3) -> (Option<usize>, f64) {
    let (w, g) = serving(config, pinch, at);
    let rate = w.map_or(0.0, |w| spectral_efficiency(config, config.waveguides[w].tx_power, g));
    (w, rate)
}

fn coords_of(config: &ScenarioConfig, pinch: &PinchConfiguration) -> Vec<f64> {
    (0..config.waveguides.len()).flat_map(|w| pinch.active(w).collect::<Vec<_>>()).collect()
}

pub fn mobility_track(config: &ScenarioConfig, tracking: Tracking<'_>, opts: &MobilityOptions) -> Result<MobilityReport> {
    if config.users.is_empty() || config.waveguides.is_empty() {
        return Err(Error::InvalidConfig("mobility tracking needs users and waveguides".into()));
    }
    if opts.ticks == 0 || !(opts.tick_seconds > 0.0) {
        return Err(Error::InvalidConfig("mobility tracking needs positive ticks and tick length".into()));
    }
    let space = SearchSpace::one_per_waveguide(config);
    let mut env = match tracking {
        Tracking::Policy(policy, cfg) => {
            let mut env = PinchEnv::new(config.clone(), cfg)?;
            env.tick_seconds = opts.tick_seconds;
            env.horizon = usize::MAX;
            if policy.actors.len() != env.agents() {
                return Err(Error::DimensionMismatch { expected: env.agents(), actual: policy.actors.len() });
            }
            Some(env)
        }
        _ => None,
    };
    let users = config.users.len();
    let mut last: Vec<Option<usize>> = vec![None; users];
    let mut run = vec![0usize; users];
    let (mut handovers, mut staleness, mut outages) = (0usize, 0usize, 0usize);
    let mut ticks = Vec::with_capacity(opts.ticks * users);
    for tick in 0..opts.ticks {
        let time = tick as f64 * opts.tick_seconds;
        let positions = config.user_positions_at(time);
        let pinch = match (tracking, env.as_mut()) {
            (Tracking::Policy(policy, _), Some(env)) => {
                let action = policy.act(&env.state())?;
                env.step(&Action::Continuous(action))?;
                PinchConfiguration::single(env.coords())
            }
            (Tracking::Grid, _) => {
                coordinate_grid(
                    &space,
                    |p| positions.iter().map(|&at| serving_rate(config, p, at).1).sum(),
                    1,
                    None,
                )?
                .best
            }
            _ => PinchConfiguration::midpoints(config),
        };
        let coords = coords_of(config, &pinch);
        for (user, &at) in positions.iter().enumerate() {
            let (w, rate) = serving_rate(config, &pinch, at);
            let serving = w.or(last[user]).unwrap_or(0);
            if last[user].is_some_and(|prev| prev != serving) {
                handovers += 1;
            }
            last[user] = Some(serving);
            let outage = rate < opts.outage_threshold;
            if outage {
                outages += 1;
                run[user] += 1;
                staleness = staleness.max(run[user]);
            } else {
                run[user] = 0;
            }
            ticks.push(MobilityTick { tick, time, user, position: at, serving, rate, outage, coords: coords.clone() });
        }
    }
    Ok(MobilityReport {
        outage_fraction: outages as f64 / (opts.ticks * users) as f64,
        handovers,
        staleness,
        ticks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::mobility_layout;

    #[test]
    fn static_unblocked_device_is_steady() {
        let mut config = mobility_layout();
        config.users[0].waypoints.clear();
        config.users[0].position = Point3::new(6.0, 6.0, 1.0);
        let r = mobility_track(&config, Tracking::Grid, &MobilityOptions::default()).unwrap();
        assert_eq!(r.handovers, 0);
        assert_eq!(r.outage_fraction, 0.0);
        assert_eq!(r.staleness, 0);
    }

    #[test]
    fn grid_tracking_reduces_outage() {
        let config = mobility_layout();
        let opts = MobilityOptions::default();
        let none = mobility_track(&config, Tracking::None, &opts).unwrap();
        let grid = mobility_track(&config, Tracking::Grid, &opts).unwrap();
        assert!(none.outage_fraction > 0.0);
        assert!(grid.outage_fraction <= none.outage_fraction);
        assert!(grid.staleness <= none.staleness);
    }

    #[test]
    fn crossing_the_midplane_hands_over() {
        let r = mobility_track(&mobility_layout(), Tracking::Grid, &MobilityOptions::default()).unwrap();
        assert!(r.handovers >= 1);
        let first = r.ticks.first().unwrap().serving;
        let last = r.ticks.last().unwrap().serving;
        assert_eq!((first, last), (0, 1));
    }

    #[test]
    fn policy_must_match_the_guides() {
        let cfg = AgentConfig::default();
        let policy = ContinuousPolicy { actors: vec![], observations: vec![], bounds: vec![] };
        assert!(mobility_track(&mobility_layout(), Tracking::Policy(&policy, &cfg), &MobilityOptions::default()).is_err());
    }
}
