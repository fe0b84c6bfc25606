//! Strict JSON inputs and bit-exact model checkpoints.

use std::fs;
use std::path::Path;

use pinch_core::neural::MlpModel;
use pinch_core::presets::{self, ScenarioId};
use pinch_core::scenario::{validate, ScenarioConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> SimResult<T> {
    let bytes = fs::read(path).map_err(|e| SimError::Read { path: path.into(), message: e.to_string() })?;
    serde_json::from_slice(&bytes).map_err(|e| SimError::Read { path: path.into(), message: e.to_string() })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> SimResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| SimError::Write { path: path.into(), source })
}

/// Parses a scenario file and rejects it unless every invariant holds.
pub fn load_scenario(path: &Path) -> SimResult<ScenarioConfig> {
    let config: ScenarioConfig = read_json(path)?;
    let violations = validate(&config);
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(SimError::Invalid(violations))
    }
}

/// Scenario from a file when given, otherwise the named preset drawn from
/// `seed`.
pub fn resolve_scenario(config: Option<&Path>, scenario: Option<&str>, seed: u64) -> SimResult<ScenarioConfig> {
    match (config, scenario) {
        (Some(_), Some(_)) => Err(SimError::Usage("pass either --config or --scenario, not both".into())),
        (Some(path), None) => load_scenario(path),
        (None, Some(name)) => Ok(presets::scenario(name.parse::<ScenarioId>()?, seed)),
        (None, None) => Err(SimError::Usage("a scenario is required: pass --config FILE or --scenario a..f".into())),
    }
}

pub const CHECKPOINT_FORMAT: &str = "pinch-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Trained networks plus what is needed to run them as a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub agent: String,
    pub scenario: String,
    pub seed: u64,
    pub models: Vec<MlpModel>,
    #[serde(default)]
    pub observations: Vec<Vec<usize>>,
    #[serde(default)]
    pub bounds: Vec<f64>,
}

impl Checkpoint {
    pub fn new(agent: &str, scenario: &str, seed: u64, models: Vec<MlpModel>) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            agent: agent.into(),
            scenario: scenario.into(),
            seed,
            models,
            observations: Vec::new(),
            bounds: Vec::new(),
        }
    }
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> SimResult<()> {
    write_json(path, checkpoint)
}

pub fn load_checkpoint(path: &Path) -> SimResult<Checkpoint> {
    let cp: Checkpoint = read_json(path)?;
    if cp.format != CHECKPOINT_FORMAT || cp.version != CHECKPOINT_VERSION {
        return Err(SimError::Read {
            path: path.into(),
            message: format!("unsupported checkpoint {} v{}", cp.format, cp.version),
        });
    }
    for m in &cp.models {
        m.check().map_err(|e| SimError::Read { path: path.into(), message: e.to_string() })?;
    }
    Ok(cp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.json");
        let mut model = MlpModel::new(&[3, 7, 2], 11).unwrap();
        model.input_mean = vec![0.1, -1.0 / 3.0, 1e-300];
        model.input_scale = vec![std::f64::consts::PI, 2.5e7, 1.0];
        let cp = Checkpoint::new("dqn", "b", 11, vec![model]);
        save_checkpoint(&path, &cp).unwrap();
        let back = load_checkpoint(&path).unwrap();
        let bits = |m: &MlpModel| m.params.iter().chain(&m.input_mean).chain(&m.input_scale).map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.models[0]), bits(&cp.models[0]));
        assert_eq!(back, cp);
    }

    #[test]
    fn unknown_scenario_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let mut value = serde_json::to_value(presets::scenario(ScenarioId::A, 0)).unwrap();
        value["colour"] = serde_json::json!("blue");
        fs::write(&path, value.to_string()).unwrap();
        assert!(matches!(load_scenario(&path), Err(SimError::Read { .. })));
    }

    #[test]
    fn preset_round_trips_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let config = presets::scenario(ScenarioId::D, 4);
        write_json(&path, &config).unwrap();
        assert_eq!(load_scenario(&path).unwrap(), config);
    }
}
