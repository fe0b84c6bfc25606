use alloc::format;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::env::nearest_index;
use crate::neural::{train, Dataset, MlpModel, TrainConfig};
use crate::presets::{self, ScenarioId};
use crate::rates::{evaluate, Assignment, PowerAllocation};
use crate::rng::derive_seed;
use crate::scenario::{candidate_positions, PinchConfiguration, ScenarioConfig};
use crate::search::{brute_force, rate_objective, Objective, SearchSpace, DEFAULT_BUDGET};
use crate::{Error, Result};

/// A single-waveguide instance with its exhaustive-search label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionerSample {
    pub config: ScenarioConfig,
    pub features: Vec<f64>,
    /// Optimal coordinate over the waveguide length.
    pub label: f64,
    /// Sum rate at the optimum.
    pub optimum: f64,
}

/// Room-normalized horizontal user coordinates.
pub fn positioner_features(config: &ScenarioConfig) -> Vec<f64> {
    let extent = config.room.extent();
    config
        .users
        .iter()
        .flat_map(|u| [(u.position.x - config.room.min.x) / extent.x, (u.position.y - config.room.min.y) / extent.y])
        .collect()
}

fn sum_rate_at(config: &ScenarioConfig, s: f64) -> Result<f64> {
    let assignment = Assignment::nearest(config);
    let power = PowerAllocation::equal_split(config, &assignment);
    Ok(evaluate(config, &PinchConfiguration::single(&[s]), &power, &assignment)?.sum_rate)
}

/// Labels `config` by exhaustive sum-rate search over its grid.
pub fn label_instance(config: ScenarioConfig) -> Result<PositionerSample> {
    if config.waveguides.len() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, actual: config.waveguides.len() });
    }
    let assignment = Assignment::nearest(&config);
    let power = PowerAllocation::equal_split(&config, &assignment);
    let space = SearchSpace::one_per_waveguide(&config);
    let result = brute_force(&space, rate_objective(&config, Objective::SumRate, &power, &assignment), DEFAULT_BUDGET)?;
    let s = space.coords(&result.best_indices)[0];
    Ok(PositionerSample {
        features: positioner_features(&config),
        label: s / config.waveguides[0].length,
        optimum: result.best_value,
        config,
    })
}

/// `count` labelled two-user NOMA instances, instance `i` drawn from its own
/// stream of `seed`.
pub fn sample_instances(count: usize, seed: u64) -> Result<Vec<PositionerSample>> {
    (0..count)
        .map(|i| label_instance(presets::scenario(ScenarioId::A, derive_seed(seed, &format!("positioner/{i}")))))
        .collect()
}

/// Regression model from user coordinates to the antenna coordinate.
#[derive(Debug)]
pub struct Positioner {
    pub model: MlpModel,
    forward_passes: AtomicU64,
}

impl Positioner {
    pub fn new(model: MlpModel) -> Self {
        Self { model, forward_passes: AtomicU64::new(0) }
    }

    /// Forward passes made by [`Positioner::predict`] so far.
    pub fn forward_passes(&self) -> u64 {
        self.forward_passes.load(Ordering::Relaxed)
    }

    /// Predicted coordinate snapped to the nearest grid candidate, from a
    /// single forward pass.
    pub fn predict(&self, config: &ScenarioConfig) -> Result<f64> {
        let guide = config.waveguides.first().ok_or(Error::NoActivePa(0))?;
        self.forward_passes.fetch_add(1, Ordering::Relaxed);
        let raw = self.model.forward(&positioner_features(config))?[0] * guide.length;
        let grid = candidate_positions(guide);
        Ok(grid[nearest_index(&grid, raw)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionerReport {
    pub instances: usize,
    /// Achieved over optimal sum rate, per instance.
    pub ratios: Vec<f64>,
    pub median_ratio: f64,
    /// Mean `|ŝ − s*|`, metres.
    pub mean_coordinate_error: f64,
    pub forward_passes: u64,
}

pub fn train_positioner(samples: &[PositionerSample], hidden: &[usize], cfg: &TrainConfig) -> Result<(Positioner, Vec<f64>)> {
    let first = samples.first().ok_or(Error::EmptyDataset)?;
    let mut sizes = alloc::vec![first.features.len()];
    sizes.extend_from_slice(hidden);
    sizes.push(1);
    let mut model = MlpModel::new(&sizes, cfg.seed)?;
    let data = Dataset {
        inputs: samples.iter().map(|s| s.features.clone()).collect(),
        targets: samples.iter().map(|s| alloc::vec![s.label]).collect(),
    };
    model.fit_normalization(&data.inputs)?;
    let trace = train(&mut model, &data, cfg)?;
    Ok((Positioner::new(model), trace))
}

pub fn evaluate_positioner(positioner: &Positioner, samples: &[PositionerSample]) -> Result<PositionerReport> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let before = positioner.forward_passes();
    let mut ratios = Vec::with_capacity(samples.len());
    let mut error = 0.0;
    for sample in samples {
        let s = positioner.predict(&sample.config)?;
        let achieved = sum_rate_at(&sample.config, s)?;
        ratios.push(super::dqn::ratio(achieved, sample.optimum));
        error += (s - sample.label * sample.config.waveguides[0].length).abs();
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median_ratio = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    Ok(PositionerReport {
        instances: n,
        ratios,
        median_ratio,
        mean_coordinate_error: error / n as f64,
        forward_passes: positioner.forward_passes() - before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn labels_match_direct_enumeration() {
        for sample in sample_instances(5, 3).unwrap() {
            let grid = candidate_positions(&sample.config.waveguides[0]);
            let best = grid
                .iter()
                .map(|&s| sum_rate_at(&sample.config, s).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(sample.optimum, best);
        }
    }

    #[test]
    fn constant_target_is_learned() {
        let one = sample_instances(1, 8).unwrap().remove(0);
        let samples = vec![one.clone(); 32];
        let cfg = TrainConfig { lr: 1e-2, batch: 8, epochs: 200, ..Default::default() };
        let (positioner, _) = train_positioner(&samples, &[8], &cfg).unwrap();
        let report = evaluate_positioner(&positioner, &[one]).unwrap();
        assert_eq!(report.median_ratio, 1.0);
        assert_eq!(report.mean_coordinate_error, 0.0);
        assert_eq!(report.forward_passes, 1);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(train_positioner(&[], &[8], &TrainConfig::default()), Err(Error::EmptyDataset)));
        let p = Positioner::new(MlpModel::new(&[4, 1], 0).unwrap());
        assert!(matches!(evaluate_positioner(&p, &[]), Err(Error::EmptyDataset)));
    }
}
