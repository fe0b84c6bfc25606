//! Physical world and run configuration: room, waveguides, candidate grids,
//! users with QoS and mobility, obstacles and radio constants.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Point3};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default pedestrian speed cap, m/s.
pub const PEDESTRIAN_SPEED: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waveguide {
    pub id: u32,
    pub feed: Point3,
    /// Unit direction of the guide, starting at the feed.
    pub axis: Point3,
    pub length: f64,
    /// Number of candidate activation positions.
    pub grid_size: usize,
    pub tx_power: f64,
}

impl Waveguide {
    pub fn far_end(&self) -> Point3 {
        self.feed + self.axis * self.length
    }

    /// Point at coordinate `s` along the guide, without range checking.
    pub fn point_at(&self, s: f64) -> Point3 {
        self.feed + self.axis * s
    }

    /// Distance from `p` to the closest point of the guide segment.
    pub fn distance_to(&self, p: Point3) -> f64 {
        let s = (p - self.feed).dot(self.axis).clamp(0.0, self.length);
        self.point_at(s).distance(p)
    }

    /// Coordinate of the orthogonal projection of `p`, clamped to the guide.
    pub fn projection(&self, p: Point3) -> f64 {
        (p - self.feed).dot(self.axis).clamp(0.0, self.length)
    }
}

/// `N` uniformly spaced coordinates on `[0, L]`, both ends included; a single
/// candidate sits at `L / 2`.
pub fn candidate_positions(w: &Waveguide) -> Vec<f64> {
    let n = w.grid_size;
    match n {
        0 => Vec::new(),
        1 => vec![w.length / 2.0],
        _ => (0..n)
            .map(|i| w.length * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinchSite {
    pub s: f64,
    pub active: bool,
}

/// Activation coordinates per waveguide. Deactivated sites are transparent to
/// the guided wave and contribute nothing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinchConfiguration {
    pub waveguides: Vec<Vec<PinchSite>>,
}

impl PinchConfiguration {
    /// One active antenna per waveguide at the given coordinates.
    pub fn single(coords: &[f64]) -> Self {
        Self {
            waveguides: coords
                .iter()
                .map(|&s| vec![PinchSite { s, active: true }])
                .collect(),
        }
    }

    /// Antenna at every waveguide's midpoint.
    pub fn midpoints(config: &ScenarioConfig) -> Self {
        let coords: Vec<f64> = config.waveguides.iter().map(|w| w.length / 2.0).collect();
        Self::single(&coords)
    }

    pub fn active(&self, waveguide: usize) -> impl Iterator<Item = f64> + '_ {
        self.waveguides
            .get(waveguide)
            .into_iter()
            .flatten()
            .filter(|site| site.active)
            .map(|site| site.s)
    }

    pub fn active_count(&self, waveguide: usize) -> usize {
        self.active(waveguide).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub time: f64,
    pub position: Point3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct User {
    pub id: u32,
    pub position: Point3,
    #[serde(default)]
    pub qos_min_rate: f64,
    /// Mobility trace. Empty means the user stays at `position`.
    #[serde(default)]
    pub waypoints: Vec<Waypoint>,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
}

fn default_v_max() -> f64 {
    PEDESTRIAN_SPEED
}

impl User {
    pub fn fixed(id: u32, position: Point3) -> Self {
        Self { id, position, qos_min_rate: 0.0, waypoints: Vec::new(), v_max: PEDESTRIAN_SPEED }
    }
}

/// Piecewise-linear position along the user's waypoints, clamped to the first
/// and last waypoint outside the covered time range.
pub fn user_position_at(u: &User, t: f64) -> Point3 {
    let wps = &u.waypoints;
    let (first, last) = match (wps.first(), wps.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return u.position,
    };
    if t <= first.time {
        return first.position;
    }
    if t >= last.time {
        return last.position;
    }
    for pair in wps.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if t <= b.time {
            let span = b.time - a.time;
            if span <= 0.0 {
                return b.position;
            }
            return a.position.lerp(b.position, (t - a.time) / span);
        }
    }
    last.position
}

/// Velocity of the waypoint segment active at `t` (zero outside the trace).
pub fn user_velocity_at(u: &User, t: f64) -> Point3 {
    for pair in u.waypoints.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if t >= a.time && t < b.time && b.time > a.time {
            return (b.position - a.position) * (1.0 / (b.time - a.time));
        }
    }
    Point3::ORIGIN
}

pub type Obstacle = Aabb;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConstants {
    pub frequency_hz: f64,
    pub wavelength_m: f64,
    /// Effective refractive index of the dielectric guide.
    pub n_eff: f64,
    /// Path-loss scale in m².
    pub eta: f64,
    pub noise_power_w: f64,
    #[serde(default)]
    pub attenuation_db_per_m: f64,
}

impl RadioConstants {
    /// Lossless guide with `n_eff = 1.4` and free-space `eta = c² / (16 π² f²)`.
    pub fn at_frequency(frequency_hz: f64) -> Self {
        let wavelength = SPEED_OF_LIGHT / frequency_hz;
        let four_pi = 4.0 * core::f64::consts::PI;
        Self {
            frequency_hz,
            wavelength_m: wavelength,
            n_eff: 1.4,
            eta: (wavelength / four_pi).powi(2),
            noise_power_w: 1e-11,
            attenuation_db_per_m: 0.0,
        }
    }
}

impl Default for RadioConstants {
    fn default() -> Self {
        Self::at_frequency(28e9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AccessMode {
    #[default]
    Oma,
    Noma,
    MultiWaveguide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    pub min: Point3,
    pub max: Point3,
}

impl Room {
    pub fn contains(&self, p: Point3) -> bool {
        self.min.le(p) && p.le(self.max)
    }

    pub fn center(&self) -> Point3 {
        self.min.lerp(self.max, 0.5)
    }

    pub fn extent(&self) -> Point3 {
        self.max - self.min
    }
}

/// Everything a run needs; the single source of truth for the physics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub room: Room,
    pub waveguides: Vec<Waveguide>,
    pub users: Vec<User>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub radio: RadioConstants,
    pub min_spacing: f64,
    #[serde(default)]
    pub access_mode: AccessMode,
    #[serde(default)]
    pub seed: u64,
    /// Static circuit power in the energy-efficiency denominator, W.
    #[serde(default = "default_circuit_power")]
    pub circuit_power: f64,
    /// Optional activation state shipped with the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinch: Option<PinchConfiguration>,
}

fn default_circuit_power() -> f64 {
    1.0
}

impl ScenarioConfig {
    pub fn user_positions(&self) -> Vec<Point3> {
        self.users.iter().map(|u| u.position).collect()
    }

    pub fn user_positions_at(&self, t: f64) -> Vec<Point3> {
        self.users.iter().map(|u| user_position_at(u, t)).collect()
    }

    pub fn candidates(&self) -> Vec<Vec<f64>> {
        self.waveguides.iter().map(candidate_positions).collect()
    }

    /// Half a free-space wavelength.
    pub fn half_wavelength(&self) -> f64 {
        self.radio.wavelength_m / 2.0
    }
}

/// A broken invariant, naming the offending field and the rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self { field: field.into(), rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

fn check_point(out: &mut Vec<Violation>, field: &str, p: Point3) {
    if !p.is_finite() {
        out.push(Violation::new(field, "coordinates must be finite"));
    }
}

/// Checks every type invariant of the scenario. An empty list means the
/// configuration is accepted by every downstream module.
pub fn validate(config: &ScenarioConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let room = &config.room;
    check_point(&mut out, "room.min", room.min);
    check_point(&mut out, "room.max", room.max);
    if !room.min.le(room.max) {
        out.push(Violation::new("room", "min must not exceed max componentwise"));
    }

    if config.waveguides.is_empty() {
        out.push(Violation::new("waveguides", "at least one waveguide is required (K >= 1)"));
    }
    for (i, w) in config.waveguides.iter().enumerate() {
        let f = |name: &str| format!("waveguides[{i}].{name}");
        check_point(&mut out, &f("feed"), w.feed);
        check_point(&mut out, &f("axis"), w.axis);
        if (w.axis.norm() - 1.0).abs() > 1e-9 {
            out.push(Violation::new(f("axis"), "must be a unit vector (|axis| = 1 +/- 1e-9)"));
        }
        if !(w.length > 0.0 && w.length.is_finite()) {
            out.push(Violation::new(f("length"), "must be positive and finite"));
        }
        if w.grid_size < 1 {
            out.push(Violation::new(f("grid_size"), "must be at least 1"));
        }
        if !(w.tx_power >= 0.0 && w.tx_power.is_finite()) {
            out.push(Violation::new(f("tx_power"), "must be non-negative and finite"));
        }
        if w.feed.is_finite() && w.length.is_finite() {
            if !room.contains(w.feed) {
                out.push(Violation::new(f("feed"), "must lie inside the room"));
            }
            if !room.contains(w.far_end()) {
                out.push(Violation::new(f("length"), "far end must lie inside the room"));
            }
        }
    }

    for (i, u) in config.users.iter().enumerate() {
        let f = |name: &str| format!("users[{i}].{name}");
        check_point(&mut out, &f("position"), u.position);
        if u.position.is_finite() && !room.contains(u.position) {
            out.push(Violation::new(f("position"), "must lie inside the room"));
        }
        if !(u.qos_min_rate >= 0.0 && u.qos_min_rate.is_finite()) {
            out.push(Violation::new(f("qos_min_rate"), "must be non-negative and finite"));
        }
        if !(u.v_max >= 0.0) {
            out.push(Violation::new(f("v_max"), "must be non-negative"));
        }
        for (j, wp) in u.waypoints.iter().enumerate() {
            check_point(&mut out, &format!("users[{i}].waypoints[{j}].position"), wp.position);
            if wp.position.is_finite() && !room.contains(wp.position) {
                out.push(Violation::new(
                    format!("users[{i}].waypoints[{j}].position"),
                    "must lie inside the room",
                ));
            }
        }
        for (j, pair) in u.waypoints.windows(2).enumerate() {
            let dt = pair[1].time - pair[0].time;
            let field = format!("users[{i}].waypoints[{}]", j + 1);
            if !(dt > 0.0) {
                out.push(Violation::new(field, "waypoint times must be strictly increasing"));
                continue;
            }
            let speed = pair[0].position.distance(pair[1].position) / dt;
            if speed > u.v_max * (1.0 + 1e-12) {
                out.push(Violation::new(field, format!("implied speed {speed} m/s exceeds v_max")));
            }
        }
    }

    for (i, o) in config.obstacles.iter().enumerate() {
        check_point(&mut out, &format!("obstacles[{i}].min"), o.min);
        check_point(&mut out, &format!("obstacles[{i}].max"), o.max);
        if !o.min.le(o.max) {
            out.push(Violation::new(format!("obstacles[{i}]"), "min must not exceed max componentwise"));
        }
    }

    let r = &config.radio;
    if !(r.frequency_hz > 0.0 && r.frequency_hz.is_finite()) {
        out.push(Violation::new("radio.frequency_hz", "must be positive and finite"));
    } else {
        let expected = SPEED_OF_LIGHT / r.frequency_hz;
        if !((r.wavelength_m - expected).abs() <= 1e-9 * expected) {
            out.push(Violation::new("radio.wavelength_m", "must equal c / f within 1e-9 relative"));
        }
    }
    if !(r.n_eff >= 1.0) {
        out.push(Violation::new("radio.n_eff", "must be at least 1"));
    }
    if !(r.eta > 0.0 && r.eta.is_finite()) {
        out.push(Violation::new("radio.eta", "must be positive and finite"));
    }
    if !(r.noise_power_w > 0.0 && r.noise_power_w.is_finite()) {
        out.push(Violation::new("radio.noise_power_w", "must be positive"));
    }
    if !(r.attenuation_db_per_m >= 0.0) {
        out.push(Violation::new("radio.attenuation_db_per_m", "must be non-negative"));
    }
    if !(config.min_spacing >= 0.0 && config.min_spacing.is_finite()) {
        out.push(Violation::new("min_spacing", "must be non-negative and finite"));
    }
    if !(config.circuit_power >= 0.0 && config.circuit_power.is_finite()) {
        out.push(Violation::new("circuit_power", "must be non-negative and finite"));
    }

    if let Some(pinch) = &config.pinch {
        if out.iter().all(|v| !v.field.starts_with("waveguides")) {
            out.extend(validate_pinch(config, pinch));
        }
    }
    out
}

/// Checks an activation state against the scenario: coordinate range, pairwise
/// spacing of active antennas, and at least one active antenna on every
/// waveguide that serves a user (nearest-waveguide association).
pub fn validate_pinch(config: &ScenarioConfig, pinch: &PinchConfiguration) -> Vec<Violation> {
    let mut out = Vec::new();
    if pinch.waveguides.len() != config.waveguides.len() {
        out.push(Violation::new(
            "pinch.waveguides",
            format!("expected {} entries, found {}", config.waveguides.len(), pinch.waveguides.len()),
        ));
        return out;
    }
    for (i, (w, sites)) in config.waveguides.iter().zip(&pinch.waveguides).enumerate() {
        for (j, site) in sites.iter().enumerate() {
            if !(site.s >= 0.0 && site.s <= w.length) {
                out.push(Violation::new(format!("pinch.waveguides[{i}][{j}].s"), "must lie in [0, L]"));
            }
        }
        let active: Vec<f64> = sites.iter().filter(|s| s.active).map(|s| s.s).collect();
        for a in 0..active.len() {
            for b in a + 1..active.len() {
                if (active[a] - active[b]).abs() < config.min_spacing {
                    out.push(Violation::new(
                        format!("pinch.waveguides[{i}]"),
                        format!(
                            "active antennas at {} and {} are closer than min_spacing {}",
                            active[a], active[b], config.min_spacing
                        ),
                    ));
                }
            }
        }
    }
    for (k, u) in config.users.iter().enumerate() {
        if let Some(w) = nearest_waveguide(config, u.position) {
            if pinch.active_count(w) == 0 {
                out.push(Violation::new(
                    format!("pinch.waveguides[{w}]"),
                    format!("serves user {k} but has no active antenna"),
                ));
            }
        }
    }
    out.dedup();
    out
}

/// Index of the waveguide closest to `p`; ties go to the lower index.
pub fn nearest_waveguide(config: &ScenarioConfig, p: Point3) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, w) in config.waveguides.iter().enumerate() {
        let d = w.distance_to(p);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

impl fmt::Display for AccessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AccessMode::Oma => "OMA",
            AccessMode::Noma => "NOMA",
            AccessMode::MultiWaveguide => "MULTI_WAVEGUIDE",
        };
        f.write_str(s)
    }
}

/// Human-readable list of violations, one per line.
pub fn describe(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n")
}
