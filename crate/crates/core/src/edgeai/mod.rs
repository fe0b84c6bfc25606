//! Co-simulations of antenna-assisted edge AI: federated learning with
//! straggler rescue, over-the-air aggregation, hotspot balancing and
//! mobility tracking.

pub mod aircomp;
pub mod classify;
pub mod fl;
pub mod hotspot;
pub mod mobility;

use serde::{Deserialize, Serialize};

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::Point3;
use crate::propagation::channel_coeff;
use crate::scenario::ScenarioConfig;

pub use aircomp::{aircomp_aggregate, aircomp_with_pa, AirCompConfig, AirCompSetup};
pub use classify::{classify, DeviceClass, Thresholds};
pub use fl::{fl_run, FlConfig, FlRoundLog, FlRun};
pub use hotspot::{hotspot_schedule, HotspotPolicy, TrafficMap};
pub use mobility::{mobility_track, MobilityOptions, MobilityReport, Tracking};

/// Uplink options compared throughout the co-simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    /// Conventional access point only.
    NoPa,
    /// One antenna fixed at the waveguide midpoint.
    FixedPa,
    /// Antenna placed by coordinate search every round.
    OptimizedPa,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::NoPa, Scheme::FixedPa, Scheme::OptimizedPa];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::NoPa => "NO_PA",
            Scheme::FixedPa => "FIXED_PA",
            Scheme::OptimizedPa => "OPTIMIZED_PA",
        }
    }
}

/// `|h|²` between a radiating point and a device; zero when blocked. `s` is
/// the in-guide distance travelled (0 for the access point).
pub fn link_gain(config: &ScenarioConfig, from: Point3, s: f64, to: Point3) -> f64 {
    channel_coeff(from, s, to, &config.radio, &config.obstacles)
        .map(|h| h.norm_sqr())
        .unwrap_or(0.0)
}

/// `log2(1 + p·g/σ²)`.
pub fn spectral_efficiency(config: &ScenarioConfig, power: f64, gain: f64) -> f64 {
    libm::log2(1.0 + power * gain / config.radio.noise_power_w)
}

/// Uplink gain from antenna coordinate `s` on waveguide `w` to `to`.
pub fn pa_link_gain(config: &ScenarioConfig, w: usize, s: f64, to: Point3) -> f64 {
    let guide = &config.waveguides[w];
    if !(0.0..=guide.length).contains(&s) {
        return 0.0;
    }
    link_gain(config, guide.point_at(s), s, to)
}

pub(crate) fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some(0.5 * (v[n / 2 - 1] + v[n / 2])),
    }
}
