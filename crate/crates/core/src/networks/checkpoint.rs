use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Model, Network};
use crate::error::{Error, Result};
use crate::sampling::{InputNorm, OutputNorm};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Architecture descriptor sufficient to rebuild an empty network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    Kan { shape: Vec<usize>, grid: usize, degree: usize },
    Mlp { shape: Vec<usize> },
    Rbf { dim: usize, centers: usize },
}

/// JSON checkpoint of a network plus the normalisation it was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub architecture: Architecture,
    pub params: Vec<f64>,
    #[serde(default)]
    pub input_norm: Option<InputNorm>,
    #[serde(default)]
    pub output_norm: Option<OutputNorm>,
    #[serde(default)]
    pub meta: serde_json::Map<String, serde_json::Value>,
}

impl Checkpoint {
    pub fn of<N: Network + ?Sized>(net: &N) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            architecture: net.architecture(),
            params: net.params().to_vec(),
            input_norm: None,
            output_norm: None,
            meta: Default::default(),
        }
    }

    pub fn model(&self) -> Result<Model> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        Model::from_parts(&self.architecture, self.params.clone())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let bytes = fs::read(path)?;
        let ck: Checkpoint = serde_json::from_slice(&bytes)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {}", ck.version)));
        }
        Ok(ck)
    }
}
