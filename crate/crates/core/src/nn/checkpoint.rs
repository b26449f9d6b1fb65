//! Parameter checkpoints: JSON with the network shape header.
//!
//! serde_json writes every f64 in shortest round-trip form, so a save/load
//! cycle is bit-exact.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{check_params, MlpSpec, ParamVector};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "fracpinn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCheckpoint {
    pub spec: MlpSpec,
    pub params: ParamVector,
}

/// Named networks plus named trainable scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub networks: BTreeMap<String, NetworkCheckpoint>,
    pub scalars: BTreeMap<String, f64>,
}

impl Default for Checkpoint {
    fn default() -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            networks: BTreeMap::new(),
            scalars: BTreeMap::new(),
        }
    }
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(format!("checkpoint serialization: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("checkpoint parse: {e}")))?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint {} v{} (expected {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION})",
                ck.format, ck.version
            )));
        }
        for (name, net) in &ck.networks {
            check_params(&net.spec, net.params.as_slice())
                .map_err(|e| Error::Config(format!("checkpoint network {name}: {e}")))?;
        }
        Ok(ck)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn network(&self, name: &str) -> Result<&NetworkCheckpoint> {
        self.networks
            .get(name)
            .ok_or_else(|| Error::Config(format!("checkpoint has no network named {name}")))
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        self.scalars
            .get(name)
            .copied()
            .ok_or_else(|| Error::Config(format!("checkpoint has no scalar named {name}")))
    }
}
