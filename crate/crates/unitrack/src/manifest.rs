use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::{save_json, sibling};
use crate::Result;

/// Record of one invocation, written next to its primary output as
/// `<out>.manifest.json`. Holds no timestamps so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            config,
            seed,
        }
    }

    pub fn input(mut self, name: &str, path: &Path) -> Self {
        self.inputs.insert(name.into(), path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Writes the manifest beside `primary_out` and returns its path.
    pub fn write_beside(&self, primary_out: &Path) -> Result<std::path::PathBuf> {
        let path = sibling(primary_out, "manifest.json");
        save_json(self, &path)?;
        Ok(path)
    }
}
