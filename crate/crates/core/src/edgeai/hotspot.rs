//! Slot-by-slot antenna placement under shifting user demand.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::rates::{evaluate, Assignment, PowerAllocation};
use crate::scenario::{PinchConfiguration, ScenarioConfig};
use crate::search::{coordinate_grid, SearchSpace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HotspotPolicy {
    /// Keep the slot-0 placement.
    Static,
    /// Re-place every slot.
    Adaptive,
}

impl HotspotPolicy {
    pub fn name(self) -> &'static str {
        match self {
            HotspotPolicy::Static => "STATIC",
            HotspotPolicy::Adaptive => "ADAPTIVE",
        }
    }
}

/// Per-slot, per-user demand in bits/s/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficMap {
    pub demands: Vec<Vec<f64>>,
}

impl TrafficMap {
    pub fn uniform(users: usize, slots: usize, demand: f64) -> Self {
        Self { demands: alloc::vec![alloc::vec![demand; users]; slots] }
    }

    /// `base` demand everywhere, with user `first` at `peak` for the first
    /// half of the slots and user `second` at `peak` for the rest.
    pub fn moving_hotspot(users: usize, slots: usize, base: f64, peak: f64, first: usize, second: usize) -> Self {
        let demands = (0..slots)
            .map(|t| {
                let hot = if t < slots / 2 { first } else { second };
                (0..users).map(|k| if k == hot { peak } else { base }).collect()
            })
            .collect();
        Self { demands }
    }

    pub fn validate(&self, users: usize) -> Result<()> {
        if self.demands.is_empty() {
            return Err(Error::InvalidConfig("traffic map has no slots".into()));
        }
        for slot in &self.demands {
            if slot.len() != users {
                return Err(Error::DimensionMismatch { expected: users, actual: slot.len() });
            }
            if slot.iter().any(|d| !(*d >= 0.0 && d.is_finite())) || slot.iter().all(|d| *d == 0.0) {
                return Err(Error::InvalidConfig("each slot needs finite non-negative demand with one positive entry".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotspotSlot {
    pub slot: usize,
    pub coords: Vec<f64>,
    /// `min_k rate_k / demand_k` over users with demand.
    pub min_rate: f64,
    /// `Σ min(demand_k, rate_k)`.
    pub served_load: f64,
}

fn slot_metrics(config: &ScenarioConfig, pinch: &PinchConfiguration, demand: &[f64]) -> Result<(f64, f64)> {
    let assignment = Assignment::nearest(config);
    let power = PowerAllocation::equal_split(config, &assignment);
    let report = evaluate(config, pinch, &power, &assignment)?;
    let min_rate = report
        .per_user
        .iter()
        .zip(demand)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, d)| r / d)
        .fold(f64::INFINITY, f64::min);
    let served = report.per_user.iter().zip(demand).map(|(r, d)| r.min(*d)).sum();
    Ok((min_rate, served))
}

fn best_for(config: &ScenarioConfig, space: &SearchSpace, demand: &[f64]) -> Result<PinchConfiguration> {
    let result = coordinate_grid(
        space,
        |p| slot_metrics(config, p, demand).map_or(f64::NEG_INFINITY, |(m, _)| m),
        1,
        None,
    )?;
    Ok(result.best)
}

pub fn hotspot_schedule(config: &ScenarioConfig, traffic: &TrafficMap, policy: HotspotPolicy) -> Result<Vec<HotspotSlot>> {
    traffic.validate(config.users.len())?;
    let space = SearchSpace::one_per_waveguide(config);
    let initial = best_for(config, &space, &traffic.demands[0])?;
    traffic
        .demands
        .iter()
        .enumerate()
        .map(|(slot, demand)| {
            let pinch = match (policy, slot) {
                (HotspotPolicy::Adaptive, s) if s > 0 => best_for(config, &space, demand)?,
                _ => initial.clone(),
            };
            let (min_rate, served_load) = slot_metrics(config, &pinch, demand)?;
            let coords = (0..config.waveguides.len()).flat_map(|w| pinch.active(w).collect::<Vec<_>>()).collect();
            Ok(HotspotSlot { slot, coords, min_rate, served_load })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::hotspot_layout;

    #[test]
    fn uniform_traffic_needs_no_adaptation() {
        let config = hotspot_layout();
        let traffic = TrafficMap::uniform(4, 6, 2.0);
        assert_eq!(
            hotspot_schedule(&config, &traffic, HotspotPolicy::Static).unwrap(),
            hotspot_schedule(&config, &traffic, HotspotPolicy::Adaptive).unwrap()
        );
    }

    #[test]
    fn adaptive_follows_a_moving_hotspot() {
        let config = hotspot_layout();
        let traffic = TrafficMap::moving_hotspot(4, 8, 1.0, 6.0, 0, 3);
        let fixed = hotspot_schedule(&config, &traffic, HotspotPolicy::Static).unwrap();
        let adaptive = hotspot_schedule(&config, &traffic, HotspotPolicy::Adaptive).unwrap();
        for t in 4..8 {
            assert!(adaptive[t].min_rate >= fixed[t].min_rate);
        }
        assert!(adaptive[4].min_rate > fixed[4].min_rate);
        assert_ne!(adaptive[4].coords, fixed[4].coords);
    }

    #[test]
    fn single_slot_policies_agree() {
        let config = hotspot_layout();
        let traffic = TrafficMap::moving_hotspot(4, 1, 1.0, 6.0, 2, 2);
        assert_eq!(
            hotspot_schedule(&config, &traffic, HotspotPolicy::Static).unwrap(),
            hotspot_schedule(&config, &traffic, HotspotPolicy::Adaptive).unwrap()
        );
    }

    #[test]
    fn malformed_traffic_rejected() {
        let config = hotspot_layout();
        assert!(hotspot_schedule(&config, &TrafficMap { demands: alloc::vec![] }, HotspotPolicy::Static).is_err());
        assert!(hotspot_schedule(&config, &TrafficMap::uniform(3, 2, 1.0), HotspotPolicy::Static).is_err());
        assert!(hotspot_schedule(&config, &TrafficMap::uniform(4, 2, 0.0), HotspotPolicy::Static).is_err());
    }
}
