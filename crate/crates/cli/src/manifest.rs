//! Run manifests, written next to every output as `<out>.manifest.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub parallel: bool,
    pub threads: Option<usize>,
    pub options: BTreeMap<String, String>,
    /// Stage name to the sub-seed of its random stream.
    pub sub_seeds: BTreeMap<String, u64>,
    pub timings: Vec<(String, f64)>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    #[serde(skip)]
    clock: Option<(String, Instant)>,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, threads: Option<usize>) -> Self {
        RunManifest {
            command: command.to_string(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            parallel: cfg!(feature = "parallel"),
            threads,
            options: BTreeMap::new(),
            sub_seeds: BTreeMap::new(),
            timings: Vec::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            clock: None,
        }
    }

    pub fn option(&mut self, key: &str, value: impl ToString) {
        self.options.insert(key.to_string(), value.to_string());
    }

    pub fn sub_seed(&mut self, stage: &str, seed: u64) {
        self.sub_seeds.insert(stage.to_string(), seed);
    }

    /// Ends the running stage, if any, and starts `name`.
    pub fn stage(&mut self, name: &str) {
        self.end_stage();
        self.clock = Some((name.to_string(), Instant::now()));
    }

    pub fn end_stage(&mut self) {
        if let Some((name, t)) = self.clock.take() {
            self.timings.push((name, t.elapsed().as_secs_f64()));
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.insert(path.display().to_string(), digest(bytes));
    }

    pub fn output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.insert(path.display().to_string(), digest(bytes));
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
