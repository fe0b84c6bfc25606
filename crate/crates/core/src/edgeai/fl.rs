//! Federated averaging over a synthetic non-IID classification task, with
//! round deadlines and antenna-assisted straggler rescue.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Gamma, Normal};
use serde::{Deserialize, Serialize};

#[allow(unused_imports)]
use num_traits::Float;

use super::classify::{classify, DeviceClass, Thresholds};
use super::{link_gain, median, pa_link_gain, spectral_efficiency, Scheme};
use crate::neural::{train, Dataset, Loss, MlpModel, OptimizerKind, TrainConfig};
use crate::presets::edge_access_point;
use crate::rng::{derive_seed, rng_stream};
use crate::scenario::{PinchConfiguration, ScenarioConfig};
use crate::search::{coordinate_grid, SearchSpace};
use crate::{Error, Result};

pub const CLASSES: usize = 4;
pub const MODEL_SIZES: [usize; 3] = [2, 32, CLASSES];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlConfig {
    pub rounds: usize,
    /// Mean local dataset size; the pooled set holds this many per device.
    pub samples_per_device: usize,
    pub test_samples: usize,
    pub lr: f64,
    pub batch: usize,
    pub bandwidth_hz: f64,
    pub model_bits: f64,
    pub device_tx_power: f64,
    /// Deadline as a multiple of the median access-point round time.
    pub deadline_multiple: f64,
    /// Mean local epoch time; each device draws a factor in `[0.8, 1.2)`.
    pub compute_seconds: f64,
    pub dirichlet_alpha: f64,
    /// Distance of each class mean from the origin along its diagonal.
    pub class_offset: f64,
    pub thresholds: Thresholds,
    /// Per-device data value in `[0, 1]`; drawn uniformly when absent.
    pub data_values: Option<Vec<f64>>,
}

impl Default for FlConfig {
    fn default() -> Self {
        Self {
            rounds: 30,
            samples_per_device: 200,
            test_samples: 2000,
            lr: 0.05,
            batch: 16,
            bandwidth_hz: 1e6,
            model_bits: 1e6,
            device_tx_power: 0.1,
            deadline_multiple: 2.0,
            compute_seconds: 0.2,
            dirichlet_alpha: 0.3,
            class_offset: 1.5,
            thresholds: Thresholds::default(),
            data_values: None,
        }
    }
}

impl FlConfig {
    pub fn validate(&self, devices: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if devices == 0 {
            return bad("federated learning needs at least one device");
        }
        if self.rounds == 0 || self.samples_per_device == 0 || self.test_samples == 0 || self.batch == 0 {
            return bad("rounds, samples, test samples and batch must be positive");
        }
        if !(self.lr >= 0.0 && self.bandwidth_hz > 0.0 && self.model_bits >= 0.0 && self.device_tx_power > 0.0) {
            return bad("learning rate, bandwidth, model size and transmit power must be positive");
        }
        if !(self.deadline_multiple > 0.0 && self.compute_seconds > 0.0 && self.dirichlet_alpha > 0.0) {
            return bad("deadline multiple, compute cost and Dirichlet concentration must be positive");
        }
        if let Some(v) = &self.data_values {
            if v.len() != devices {
                return Err(Error::DimensionMismatch { expected: devices, actual: v.len() });
            }
            if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return bad("data values must lie in [0, 1]");
            }
        }
        Ok(())
    }

    fn upload_seconds(&self, se: f64) -> f64 {
        if self.bandwidth_hz.is_infinite() || self.model_bits == 0.0 {
            0.0
        } else {
            self.model_bits / (self.bandwidth_hz * se)
        }
    }
}

/// Local data and timing of one device.
#[derive(Debug, Clone, PartialEq)]
pub struct FlDevice {
    pub id: usize,
    pub data: Dataset,
    pub data_value: f64,
    pub compute_seconds: f64,
    /// Spectral efficiency to the access point.
    pub ap_se: f64,
    /// `ap_se` relative to the best device.
    pub quality: f64,
    pub class: DeviceClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlRoundLog {
    pub round: usize,
    /// Contributing devices in ascending id order.
    pub selected: Vec<usize>,
    /// Aggregation weight of each selected device.
    pub weights: Vec<f64>,
    /// Compute plus upload time per device; infinite when the link is dead.
    pub device_seconds: Vec<f64>,
    pub deadline: f64,
    /// Slowest selected device.
    pub round_seconds: f64,
    pub accuracy: f64,
    pub dropped: usize,
    /// Selected devices that would have missed the deadline on the access point.
    pub rescued: usize,
    pub pa_coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlRun {
    pub scheme: Scheme,
    pub devices: Vec<FlDevice>,
    pub logs: Vec<FlRoundLog>,
    pub model: MlpModel,
}

impl FlRun {
    pub fn accuracy(&self) -> Vec<f64> {
        self.logs.iter().map(|l| l.accuracy).collect()
    }

    pub fn final_accuracy(&self) -> f64 {
        self.logs.last().map_or(0.0, |l| l.accuracy)
    }
}

fn class_mean(class: usize, offset: f64) -> [f64; 2] {
    let sx = if class & 1 == 0 { -1.0 } else { 1.0 };
    let sy = if class & 2 == 0 { -1.0 } else { 1.0 };
    [sx * offset, sy * offset]
}

fn one_hot(class: usize) -> Vec<f64> {
    let mut t = vec![0.0; CLASSES];
    t[class] = 1.0;
    t
}

fn draw_point<R: Rng>(rng: &mut R, class: usize, offset: f64) -> Vec<f64> {
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let m = class_mean(class, offset);
    vec![m[0] + noise.sample(rng), m[1] + noise.sample(rng)]
}

/// Balanced held-out set shared by every scheme.
pub fn test_set(fl: &FlConfig, seed: u64) -> Dataset {
    let mut rng = rng_stream(seed, "fl/test");
    let mut data = Dataset { inputs: Vec::with_capacity(fl.test_samples), targets: Vec::with_capacity(fl.test_samples) };
    for i in 0..fl.test_samples {
        let c = i % CLASSES;
        data.inputs.push(draw_point(&mut rng, c, fl.class_offset));
        data.targets.push(one_hot(c));
    }
    data
}

/// Splits a class-balanced pool of `samples_per_device · devices` points:
/// each class is spread over the devices by its own Dirichlet draw, so local
/// label mixes and dataset sizes are skewed while the union stays balanced.
pub fn partition(fl: &FlConfig, seed: u64, devices: usize) -> Result<Vec<Dataset>> {
    fl.validate(devices)?;
    let mut rng = rng_stream(seed, "fl/partition");
    let gamma = Gamma::new(fl.dirichlet_alpha, 1.0)
        .map_err(|_| Error::InvalidConfig("Dirichlet concentration must be positive".into()))?;
    let per_class = fl.samples_per_device * devices / CLASSES;
    let mut out = vec![Dataset { inputs: Vec::new(), targets: Vec::new() }; devices];
    for c in 0..CLASSES {
        let shares: Vec<f64> = (0..devices).map(|_| gamma.sample(&mut rng)).collect();
        let pick = WeightedIndex::new(&shares)
            .or_else(|_| WeightedIndex::new(vec![1.0; devices]))
            .expect("uniform weights");
        for _ in 0..per_class {
            let k = pick.sample(&mut rng);
            out[k].inputs.push(draw_point(&mut rng, c, fl.class_offset));
            out[k].targets.push(one_hot(c));
        }
    }
    Ok(out)
}

/// Devices of `config` with their data, values, timing and class.
pub fn build_devices(config: &ScenarioConfig, fl: &FlConfig, seed: u64) -> Result<Vec<FlDevice>> {
    let k = config.users.len();
    fl.validate(k)?;
    let values = match &fl.data_values {
        Some(v) => v.clone(),
        None => {
            let mut rng = rng_stream(seed, "fl/values");
            (0..k).map(|_| rng.random::<f64>()).collect()
        }
    };
    let mut speed = rng_stream(seed, "fl/speed");
    let ap = edge_access_point(config);
    let ses: Vec<f64> = config
        .users
        .iter()
        .map(|u| spectral_efficiency(config, fl.device_tx_power, link_gain(config, ap, 0.0, u.position)))
        .collect();
    let best = ses.iter().cloned().fold(0.0, f64::max);
    let mut devices = Vec::with_capacity(k);
    let datasets = partition(fl, seed, k)?;
    for (id, ((&ap_se, &data_value), data)) in ses.iter().zip(&values).zip(datasets).enumerate() {
        let quality = if best > 0.0 { ap_se / best } else { 0.0 };
        let factor = speed.random_range(0.8..1.2);
        devices.push(FlDevice {
            id,
            data,
            data_value,
            compute_seconds: fl.compute_seconds * factor,
            ap_se,
            quality,
            class: classify(data_value, quality, &fl.thresholds),
        });
    }
    Ok(devices)
}

/// Best spectral efficiency from any single active antenna in `pinch`.
pub fn pa_spectral_efficiency(config: &ScenarioConfig, fl: &FlConfig, pinch: &PinchConfiguration, device: usize) -> f64 {
    let at = config.users[device].position;
    (0..config.waveguides.len())
        .flat_map(|w| pinch.active(w).map(move |s| (w, s)))
        .map(|(w, s)| spectral_efficiency(config, fl.device_tx_power, pa_link_gain(config, w, s, at)))
        .fold(0.0, f64::max)
}

/// Antenna placement for `scheme` given the devices that qualify for help.
/// `None` under [`Scheme::NoPa`].
pub fn place_antennas(config: &ScenarioConfig, fl: &FlConfig, scheme: Scheme, assisted: &[usize]) -> Result<Option<PinchConfiguration>> {
    match scheme {
        Scheme::NoPa => Ok(None),
        Scheme::FixedPa => Ok(Some(PinchConfiguration::midpoints(config))),
        Scheme::OptimizedPa if assisted.is_empty() => Ok(Some(PinchConfiguration::midpoints(config))),
        Scheme::OptimizedPa => {
            let space = SearchSpace::one_per_waveguide(config);
            let result = coordinate_grid(
                &space,
                |pinch| {
                    assisted
                        .iter()
                        .map(|&k| pa_spectral_efficiency(config, fl, pinch, k))
                        .fold(f64::INFINITY, f64::min)
                },
                1,
                None,
            )?;
            Ok(Some(result.best))
        }
    }
}

fn accuracy(model: &MlpModel, test: &Dataset) -> Result<f64> {
    let mut hits = 0usize;
    for (x, t) in test.inputs.iter().zip(&test.targets) {
        if crate::neural::argmax(&model.forward(x)?) == crate::neural::argmax(t) {
            hits += 1;
        }
    }
    Ok(hits as f64 / test.len() as f64)
}

/// Federated averaging under `scheme`. Devices whose access-point round time
/// exceeds the deadline are stragglers; they drop out unless the scheme
/// places an antenna and the device is classed [`DeviceClass::PaAssist`].
pub fn fl_run(config: &ScenarioConfig, fl: &FlConfig, scheme: Scheme, seed: u64) -> Result<FlRun> {
    let devices = build_devices(config, fl, seed)?;
    let test = test_set(fl, seed);
    let ap_times: Vec<f64> = devices.iter().map(|d| d.compute_seconds + fl.upload_seconds(d.ap_se)).collect();
    let finite: Vec<f64> = ap_times.iter().cloned().filter(|t| t.is_finite()).collect();
    let deadline = median(&finite).ok_or(Error::NoDeviceMeetsDeadline { round: 0 })? * fl.deadline_multiple;
    let assisted: Vec<usize> = devices
        .iter()
        .filter(|d| ap_times[d.id] > deadline && d.class == DeviceClass::PaAssist)
        .map(|d| d.id)
        .collect();

    let mut model = MlpModel::new(&MODEL_SIZES, derive_seed(seed, "fl/init"))?;
    let mut logs = Vec::with_capacity(fl.rounds);
    for round in 0..fl.rounds {
        let pinch = place_antennas(config, fl, scheme, &assisted)?;
        let times: Vec<f64> = devices
            .iter()
            .map(|d| match &pinch {
                Some(p) if assisted.contains(&d.id) => {
                    let se = d.ap_se.max(pa_spectral_efficiency(config, fl, p, d.id));
                    d.compute_seconds + fl.upload_seconds(se)
                }
                _ => ap_times[d.id],
            })
            .collect();
        let selected: Vec<usize> = (0..devices.len()).filter(|&k| times[k] <= deadline).collect();
        if selected.is_empty() {
            return Err(Error::NoDeviceMeetsDeadline { round });
        }
        let total: f64 = selected.iter().map(|&k| devices[k].data.len() as f64).sum();
        if total == 0.0 {
            return Err(Error::NoDeviceMeetsDeadline { round });
        }
        let weights: Vec<f64> = selected.iter().map(|&k| devices[k].data.len() as f64 / total).collect();
        let mut next = vec![0.0; model.params.len()];
        for (&k, &w) in selected.iter().zip(&weights).filter(|(_, w)| **w > 0.0) {
            let mut local = model.clone();
            let cfg = TrainConfig {
                lr: fl.lr,
                batch: fl.batch,
                epochs: 1,
                optimizer: OptimizerKind::Sgd,
                seed: derive_seed(seed, &format!("fl/local/{round}/{k}")),
                loss: Loss::CrossEntropy,
                weight_decay: 0.0,
            };
            train(&mut local, &devices[k].data, &cfg)?;
            for (acc, p) in next.iter_mut().zip(&local.params) {
                *acc += w * p;
            }
        }
        model.params = next;
        logs.push(FlRoundLog {
            round,
            round_seconds: selected.iter().map(|&k| times[k]).fold(0.0, f64::max),
            rescued: selected.iter().filter(|&&k| ap_times[k] > deadline).count(),
            dropped: devices.len() - selected.len(),
            accuracy: accuracy(&model, &test)?,
            pa_coords: pinch.as_ref().map(|p| (0..config.waveguides.len()).flat_map(|w| p.active(w).collect::<Vec<_>>()).collect()).unwrap_or_default(),
            device_seconds: times,
            deadline,
            selected,
            weights,
        });
    }
    Ok(FlRun { scheme, devices, logs, model })
}
