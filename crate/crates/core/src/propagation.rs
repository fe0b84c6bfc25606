//! Line-of-sight channel model for waveguide-fed pinching antennas.
//!
//! Each active antenna radiates with spherical spreading and free-space phase,
//! preceded by the in-guide phase `2π n_eff s / λ` (plus optional in-guide
//! attenuation). A blocked path carries nothing. Antennas on one waveguide
//! share its power equally, so the effective gain of a waveguide toward a
//! user is `|Σ h_m / √M|²`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::geometry::Point3;
use crate::scenario::{Obstacle, PinchConfiguration, PinchSite, RadioConstants, ScenarioConfig, Waveguide};
use crate::{Error, Result};

/// Point radiating from coordinate `s` along `w`.
pub fn pa_point(w: &Waveguide, s: f64) -> Result<Point3> {
    if !(s >= 0.0 && s <= w.length) {
        return Err(Error::CoordinateOutOfRange { waveguide: w.id as usize, s, length: w.length });
    }
    Ok(w.point_at(s))
}

/// True when the segment between `a` and `b` touches any obstacle.
pub fn los_blocked(a: Point3, b: Point3, obstacles: &[Obstacle]) -> bool {
    obstacles.iter().any(|o| o.intersects_segment(a, b))
}

/// Complex coefficient from an antenna at `pa` (guide coordinate `s`) to a
/// user at `user`.
pub fn channel_coeff(
    pa: Point3,
    s: f64,
    user: Point3,
    radio: &RadioConstants,
    obstacles: &[Obstacle],
) -> Result<Complex64> {
    let d = pa.distance(user);
    if d == 0.0 {
        return Err(Error::ZeroDistance);
    }
    if los_blocked(pa, user, obstacles) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let two_pi = 2.0 * core::f64::consts::PI;
    let phase = -two_pi * (d + radio.n_eff * s) / radio.wavelength_m;
    let amplitude = radio.eta.sqrt() / d * guide_loss(radio, s);
    Ok(Complex64::from_polar(amplitude, phase))
}

fn guide_loss(radio: &RadioConstants, s: f64) -> f64 {
    if radio.attenuation_db_per_m == 0.0 {
        1.0
    } else {
        10f64.powf(-radio.attenuation_db_per_m * s / 20.0)
    }
}

/// Coherent gain of all active antennas on `w` toward `user`.
pub fn effective_gain(
    w: &Waveguide,
    sites: &[PinchSite],
    user: Point3,
    radio: &RadioConstants,
    obstacles: &[Obstacle],
) -> Result<f64> {
    let coeffs = active_coeffs(w, sites, user, radio, obstacles)?;
    if coeffs.is_empty() {
        return Err(Error::NoActivePa(w.id as usize));
    }
    Ok(coherent_gain(&coeffs))
}

/// `|Σ h / √M|²`.
pub fn coherent_gain(coeffs: &[Complex64]) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let sum: Complex64 = coeffs.iter().sum();
    sum.norm_sqr() / coeffs.len() as f64
}

fn active_coeffs(
    w: &Waveguide,
    sites: &[PinchSite],
    user: Point3,
    radio: &RadioConstants,
    obstacles: &[Obstacle],
) -> Result<Vec<Complex64>> {
    sites
        .iter()
        .filter(|site| site.active)
        .map(|site| channel_coeff(pa_point(w, site.s)?, site.s, user, radio, obstacles))
        .collect()
}

/// Channel state of every (user, waveguide) pair for one activation state.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    /// `coeffs[user][waveguide][m]` for the m-th active antenna.
    pub coeffs: Vec<Vec<Vec<Complex64>>>,
    pub blocked: Vec<Vec<Vec<bool>>>,
    /// `gains[user][waveguide]`; zero for a waveguide without active antennas.
    pub gains: Vec<Vec<f64>>,
}

impl LinkState {
    pub fn compute(config: &ScenarioConfig, pinch: &PinchConfiguration, users: &[Point3]) -> Result<Self> {
        let k_wg = config.waveguides.len();
        if pinch.waveguides.len() != k_wg {
            return Err(Error::DimensionMismatch { expected: k_wg, actual: pinch.waveguides.len() });
        }
        let mut coeffs = Vec::with_capacity(users.len());
        let mut blocked = Vec::with_capacity(users.len());
        let mut gains = Vec::with_capacity(users.len());
        for &user in users {
            let mut uc = Vec::with_capacity(k_wg);
            let mut ub = Vec::with_capacity(k_wg);
            let mut ug = vec![0.0; k_wg];
            for (w_idx, (w, sites)) in config.waveguides.iter().zip(&pinch.waveguides).enumerate() {
                let mut wc = Vec::new();
                let mut wb = Vec::new();
                for site in sites.iter().filter(|s| s.active) {
                    let pa = pa_point(w, site.s)?;
                    wb.push(los_blocked(pa, user, &config.obstacles));
                    wc.push(channel_coeff(pa, site.s, user, &config.radio, &config.obstacles)?);
                }
                ug[w_idx] = coherent_gain(&wc);
                uc.push(wc);
                ub.push(wb);
            }
            coeffs.push(uc);
            blocked.push(ub);
            gains.push(ug);
        }
        Ok(Self { coeffs, blocked, gains })
    }

    pub fn gain(&self, user: usize, waveguide: usize) -> f64 {
        self.gains[user][waveguide]
    }
}
