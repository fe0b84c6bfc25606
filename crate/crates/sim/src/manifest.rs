//! Per-run record written before a command starts and finalized after it ends.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::SimResult;
use crate::io::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector, enough to repeat the run.
    pub args: Vec<String>,
    pub config_path: Option<String>,
    pub seed: u64,
    pub code_version: String,
    pub output_dir: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: Option<u128>,
    pub status: RunStatus,
    /// Files produced, relative to `output_dir`.
    pub outputs: Vec<String>,
    pub error: Option<String>,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl RunManifest {
    pub fn begin(command: &str, args: Vec<String>, config_path: Option<&Path>, seed: u64, out: &Path) -> SimResult<Self> {
        std::fs::create_dir_all(out).map_err(|source| crate::error::SimError::Write { path: out.into(), source })?;
        let m = Self {
            command: command.into(),
            args,
            config_path: config_path.map(|p| p.display().to_string()),
            seed,
            code_version: env!("CARGO_PKG_VERSION").into(),
            output_dir: out.display().to_string(),
            started_unix_ms: now_ms(),
            finished_unix_ms: None,
            status: RunStatus::Running,
            outputs: Vec::new(),
            error: None,
        };
        m.save()?;
        Ok(m)
    }

    pub fn path(&self) -> PathBuf {
        Path::new(&self.output_dir).join(MANIFEST_FILE)
    }

    fn save(&self) -> SimResult<()> {
        write_json(&self.path(), self)
    }

    pub fn finish(mut self, outcome: &SimResult<Vec<String>>) -> SimResult<Self> {
        self.finished_unix_ms = Some(now_ms());
        match outcome {
            Ok(files) => {
                self.status = RunStatus::Succeeded;
                self.outputs = files.clone();
            }
            Err(e) => {
                self.status = RunStatus::Failed;
                self.error = Some(e.to_string());
            }
        }
        self.save()?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::read_json;

    #[test]
    fn written_before_and_finalized_after() {
        let dir = tempfile::tempdir().unwrap();
        let m = RunManifest::begin("benchmark", vec!["pinch".into()], None, 3, dir.path()).unwrap();
        let early: RunManifest = read_json(&m.path()).unwrap();
        assert_eq!(early.status, RunStatus::Running);
        let done = m.finish(&Ok(vec!["benchmark.csv".into()])).unwrap();
        let late: RunManifest = read_json(&done.path()).unwrap();
        assert_eq!(late.status, RunStatus::Succeeded);
        assert_eq!(late.outputs, vec!["benchmark.csv".to_string()]);
        assert!(late.finished_unix_ms.unwrap() >= late.started_unix_ms);
    }
}
