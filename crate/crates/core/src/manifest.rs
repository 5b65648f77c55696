//! Run manifests tying output files to the parameters that produced them.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    /// Output files relative to the run directory.
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub crate_version: String,
    /// Free-form diagnostics recorded after the run (acceptance rates,
    /// tuned proposal scales, guard trips).
    #[serde(default)]
    pub diagnostics: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.into(),
            parameters: BTreeMap::new(),
            seed,
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn output(mut self, file: impl Into<String>) -> Self {
        self.outputs.push(file.into());
        self
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Serialize) {
        self.diagnostics.insert(key.to_string(), serde_json::to_value(value).expect("serializable diagnostic"));
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_disk() {
        let mut m =
            RunManifest::new("gas", Some(42)).param("n", 100).param("alpha", 0.5).param("mode", "deterministic").output("trajectory.jsonl");
        m.wall_clock_seconds = 1.25;
        m.diagnostic("guard_trips", 0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        m.save(&path).unwrap();
        assert_eq!(RunManifest::load(&path).unwrap(), m);
    }
}
