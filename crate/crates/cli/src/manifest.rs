use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tndp_core::{Error, Result};

use crate::config::Config;

pub const MANIFEST_FILE: &str = "run_manifest.json";

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| io_err(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.into(),
        source,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Seconds since the Unix epoch.
    pub finished_at: u64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// What a run was made from and what each stage produced. Artifacts carry the
/// manifest's `lineage`, a hash of the settings and input data that does not
/// depend on where files live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub lineage: String,
    pub config: Config,
    pub inputs: BTreeMap<String, String>,
    pub stages: BTreeMap<String, StageRecord>,
}

impl RunManifest {
    pub fn new(config: &Config) -> Result<Self> {
        let mut inputs = BTreeMap::new();
        for (name, path) in [
            ("nodes", &config.data.nodes),
            ("edges", &config.data.edges),
            ("metro", &config.data.metro),
            ("walk", &config.data.walk),
            ("routes", &config.data.routes),
            ("demand", &config.data.demand),
        ] {
            if let Some(path) = path {
                if path.exists() {
                    inputs.insert(name.to_owned(), sha256_file(path)?);
                }
            }
        }
        let mut settings = config.clone();
        settings.data = Default::default();
        settings.output = Default::default();
        settings.rating.file = None;
        let fingerprint = serde_json::to_vec(&(&settings, &inputs)).expect("config serializes");
        Ok(Self {
            lineage: hex::encode(Sha256::digest(&fingerprint)),
            config: config.clone(),
            inputs,
            stages: BTreeMap::new(),
        })
    }

    /// Loads a previous manifest from `dir` when it shares this lineage.
    pub fn resume(self, dir: &Path) -> Self {
        let path = dir.join(MANIFEST_FILE);
        let previous: Option<RunManifest> = std::fs::read_to_string(&path)
            .ok()
            .and_then(|text| serde_json::from_str(&text).ok());
        match previous {
            Some(prev) if prev.lineage == self.lineage => Self {
                stages: prev.stages,
                ..self
            },
            _ => self,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        tndp_core::io::write_json(&dir.join(MANIFEST_FILE), self)
    }
}
