//! Over-the-air averaging with truncated channel inversion.

use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[allow(unused_imports)]
use num_traits::Float;

use super::{link_gain, pa_link_gain, Scheme};
use crate::presets::edge_access_point;
use crate::rng::rng_stream;
use crate::scenario::{PinchConfiguration, ScenarioConfig};
use crate::search::{coordinate_grid, SearchSpace};
use crate::{Error, Result};

/// Real-valued aggregation channel: device `k` sends `b_k·x_k` over
/// amplitude `h_k`; the receiver scales the sum by `1 / (K·a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirCompSetup {
    pub gains: Vec<f64>,
    pub tx: Vec<f64>,
    pub receive_scale: f64,
    pub noise_std: f64,
    /// Largest `b_k²`.
    pub power_cap: f64,
    pub signal_std: f64,
}

impl AirCompSetup {
    /// `b_k = min(a / h_k, √cap)`: devices in deep fade saturate at the cap.
    pub fn channel_inversion(gains: Vec<f64>, receive_scale: f64, power_cap: f64, noise_std: f64, signal_std: f64) -> Self {
        let cap = power_cap.sqrt();
        let tx = gains.iter().map(|&h| if h > 0.0 { (receive_scale / h).min(cap) } else { cap }).collect();
        Self { gains, tx, receive_scale, noise_std, power_cap, signal_std }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gains.is_empty() {
            return Err(Error::InvalidConfig("AirComp needs at least one device".into()));
        }
        if self.gains.len() != self.tx.len() {
            return Err(Error::DimensionMismatch { expected: self.gains.len(), actual: self.tx.len() });
        }
        if self.receive_scale == 0.0 {
            return Err(Error::ZeroReceiveScale);
        }
        if self.tx.iter().any(|b| b * b > self.power_cap * (1.0 + 1e-12)) {
            return Err(Error::InvalidConfig("transmit scalar exceeds the power cap".into()));
        }
        Ok(())
    }

    fn devices(&self) -> f64 {
        self.gains.len() as f64
    }

    /// `(Σ b_k h_k x_k + n) / (K a)`.
    pub fn estimate(&self, values: &[f64], noise: f64) -> Result<f64> {
        self.validate()?;
        if values.len() != self.gains.len() {
            return Err(Error::DimensionMismatch { expected: self.gains.len(), actual: values.len() });
        }
        let sum: f64 = self.gains.iter().zip(&self.tx).zip(values).map(|((h, b), x)| b * h * x).sum();
        Ok((sum + noise) / (self.devices() * self.receive_scale))
    }

    /// Closed-form MSE for independent zero-mean values of variance `σ_x²`.
    pub fn analytic_mse(&self) -> Result<f64> {
        self.validate()?;
        let k2 = self.devices() * self.devices();
        let a = self.receive_scale;
        let misalignment: f64 = self.gains.iter().zip(&self.tx).map(|(h, b)| (b * h / a - 1.0).powi(2)).sum();
        Ok(misalignment * self.signal_std.powi(2) / k2 + self.noise_std.powi(2) / (k2 * a * a))
    }

    /// Monte Carlo MSE and its standard error.
    pub fn monte_carlo_mse(&self, trials: usize, seed: u64) -> Result<(f64, f64)> {
        self.validate()?;
        if trials < 2 {
            return Err(Error::InvalidConfig("Monte Carlo needs at least two trials".into()));
        }
        let mut rng = rng_stream(seed, "aircomp/mc");
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        let mut xs = alloc::vec![0.0; self.gains.len()];
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..trials {
            for x in xs.iter_mut() {
                *x = self.signal_std * unit.sample(&mut rng);
            }
            let noise = self.noise_std * unit.sample(&mut rng);
            let truth = xs.iter().sum::<f64>() / self.devices();
            let e = (self.estimate(&xs, noise)? - truth).powi(2);
            sum += e;
            sum_sq += e * e;
        }
        let n = trials as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
        Ok((mean, (var / n).sqrt()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirCompReport {
    pub estimate: f64,
    pub mse_analytic: f64,
    pub mse_empirical: f64,
    pub std_error: f64,
}

/// One noisy aggregate of `values` plus analytic and Monte Carlo MSE.
pub fn aircomp_aggregate(setup: &AirCompSetup, values: &[f64], trials: usize, seed: u64) -> Result<AirCompReport> {
    let mut rng = rng_stream(seed, "aircomp/noise");
    let noise = setup.noise_std * Normal::new(0.0, 1.0).expect("unit normal").sample(&mut rng);
    let (mse_empirical, std_error) = setup.monte_carlo_mse(trials, seed)?;
    Ok(AirCompReport { estimate: setup.estimate(values, noise)?, mse_analytic: setup.analytic_mse()?, mse_empirical, std_error })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AirCompConfig {
    pub power_cap: f64,
    pub signal_std: f64,
    /// Distance at which a device at full power exactly meets the receive
    /// scale; sets `a`.
    pub reference_distance: f64,
    pub trials: usize,
}

impl Default for AirCompConfig {
    fn default() -> Self {
        Self { power_cap: 0.1, signal_std: 1.0, reference_distance: 8.0, trials: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirCompComparison {
    pub scheme: Scheme,
    pub gains: Vec<f64>,
    pub pa_coords: Vec<f64>,
    pub mse_analytic: f64,
    pub mse_empirical: f64,
    pub std_error: f64,
}

fn amplitudes(config: &ScenarioConfig, pinch: Option<&PinchConfiguration>) -> Vec<f64> {
    let ap = edge_access_point(config);
    config
        .users
        .iter()
        .map(|u| {
            let direct = link_gain(config, ap, 0.0, u.position);
            let assisted = pinch.map_or(0.0, |p| {
                (0..config.waveguides.len())
                    .flat_map(|w| p.active(w).map(move |s| (w, s)))
                    .map(|(w, s)| pa_link_gain(config, w, s, u.position))
                    .fold(0.0, f64::max)
            });
            direct.max(assisted).sqrt()
        })
        .collect()
}

fn setup_for(config: &ScenarioConfig, ac: &AirCompConfig, gains: Vec<f64>) -> AirCompSetup {
    let a = ac.power_cap.sqrt() * config.radio.eta.sqrt() / ac.reference_distance;
    AirCompSetup::channel_inversion(gains, a, ac.power_cap, config.radio.noise_power_w.sqrt(), ac.signal_std)
}

/// Access point alone versus the access point plus antennas placed to
/// minimize analytic MSE; each device uses its stronger link.
pub fn aircomp_with_pa(config: &ScenarioConfig, ac: &AirCompConfig, seed: u64) -> Result<[AirCompComparison; 2]> {
    let report = |scheme, pinch: Option<&PinchConfiguration>| -> Result<AirCompComparison> {
        let setup = setup_for(config, ac, amplitudes(config, pinch));
        let (mse_empirical, std_error) = setup.monte_carlo_mse(ac.trials, seed)?;
        Ok(AirCompComparison {
            scheme,
            pa_coords: pinch
                .map(|p| (0..config.waveguides.len()).flat_map(|w| p.active(w).collect::<Vec<_>>()).collect())
                .unwrap_or_default(),
            mse_analytic: setup.analytic_mse()?,
            gains: setup.gains,
            mse_empirical,
            std_error,
        })
    };
    let space = SearchSpace::one_per_waveguide(config);
    let best = coordinate_grid(
        &space,
        |p| setup_for(config, ac, amplitudes(config, Some(p))).analytic_mse().map_or(f64::NEG_INFINITY, |m| -m),
        1,
        None,
    )?;
    Ok([report(Scheme::NoPa, None)?, report(Scheme::OptimizedPa, Some(&best.best))?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::presets::edge_layout;
    use alloc::vec;

    #[test]
    fn perfect_alignment_returns_the_mean() {
        let setup = AirCompSetup { gains: vec![1.0; 3], tx: vec![1.0; 3], receive_scale: 1.0, noise_std: 0.0, power_cap: 1.0, signal_std: 1.0 };
        assert_eq!(setup.estimate(&[1.0, 2.0, 6.0], 0.0).unwrap(), 3.0);
        assert_eq!(setup.analytic_mse().unwrap(), 0.0);
    }

    #[test]
    fn noise_only_closed_form() {
        let setup = AirCompSetup { gains: vec![2.0; 4], tx: vec![0.5; 4], receive_scale: 2.0, noise_std: 0.3, power_cap: 1.0, signal_std: 0.0 };
        let expected = 0.09 / (16.0 * 4.0);
        assert_eq!(setup.analytic_mse().unwrap(), expected);
    }

    #[test]
    fn zero_receive_scale_rejected() {
        let setup = AirCompSetup { gains: vec![1.0], tx: vec![1.0], receive_scale: 0.0, noise_std: 0.0, power_cap: 1.0, signal_std: 1.0 };
        assert_eq!(setup.analytic_mse(), Err(Error::ZeroReceiveScale));
    }

    #[test]
    fn inversion_respects_cap() {
        let s = AirCompSetup::channel_inversion(vec![1.0, 0.1, 0.0], 0.5, 4.0, 0.1, 1.0);
        assert_eq!(s.tx, vec![0.5, 2.0, 2.0]);
        s.validate().unwrap();
    }

    #[test]
    fn deep_fade_monte_carlo_matches() {
        let s = AirCompSetup::channel_inversion(vec![1.0, 0.8, 0.05], 0.5, 1.0, 0.2, 1.0);
        let analytic = s.analytic_mse().unwrap();
        let (mc, se) = s.monte_carlo_mse(100_000, 7).unwrap();
        assert!((mc - analytic).abs() < 3.0 * se, "{mc} vs {analytic} ± {se}");
    }

    #[test]
    fn blocked_device_is_rescued() {
        let ac = AirCompConfig { trials: 1000, ..Default::default() };
        let [none, opt] = aircomp_with_pa(&edge_layout(), &ac, 1).unwrap();
        assert!(opt.mse_analytic < none.mse_analytic);
    }

    #[test]
    fn symmetric_devices_gain_nothing() {
        let mut config = edge_layout();
        config.obstacles.clear();
        let ap = edge_access_point(&config);
        config.users.truncate(4);
        for (k, (dx, dy)) in [(2.0, 0.0), (-2.0, 0.0), (0.0, 2.0), (0.0, -2.0)].into_iter().enumerate() {
            config.users[k].position = Point3::new(ap.x + dx, ap.y + dy, 1.0);
        }
        let ac = AirCompConfig { trials: 1000, ..Default::default() };
        let [none, opt] = aircomp_with_pa(&config, &ac, 1).unwrap();
        assert!((opt.mse_analytic - none.mse_analytic).abs() < 1e-9);
    }

    #[test]
    fn zero_signal_leaves_noise_term() {
        let ac = AirCompConfig { signal_std: 0.0, trials: 1000, ..Default::default() };
        let config = edge_layout();
        let [none, opt] = aircomp_with_pa(&config, &ac, 1).unwrap();
        let a = ac.power_cap.sqrt() * config.radio.eta.sqrt() / ac.reference_distance;
        let k = config.users.len() as f64;
        let noise = config.radio.noise_power_w / (k * k * a * a);
        assert!((none.mse_analytic - noise).abs() <= 1e-12 * noise);
        assert!((opt.mse_analytic - noise).abs() <= 1e-12 * noise);
    }
}
