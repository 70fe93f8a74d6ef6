use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Run metadata embedded in every report. Deliberately free of wall-clock
/// data so identical runs give identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub versions: Versions,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub thinframe: &'static str,
    pub cli: &'static str,
}

impl RunManifest {
    /// `config` is whatever fully determines the run apart from the seed.
    pub fn new(command: &str, config: &Value, seed: u64) -> RunManifest {
        let bytes = serde_json::to_vec(config).expect("json values serialize");
        let digest = Sha256::digest(&bytes);
        RunManifest {
            command: command.to_string(),
            config_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
            versions: Versions { thinframe: env!("CARGO_PKG_VERSION"), cli: env!("CARGO_PKG_VERSION") },
            outputs: Vec::new(),
        }
    }
}

/// Collects output files under an optional directory, then writes the JSON
/// report (with its manifest) last.
pub struct Sink {
    dir: Option<PathBuf>,
    pub manifest: RunManifest,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>, manifest: RunManifest) -> std::io::Result<Sink> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Sink { dir, manifest })
    }

    /// Writes a side file when an output directory was given.
    pub fn file(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        if let Some(d) = &self.dir {
            fs::write(d.join(name), contents)?;
            self.manifest.outputs.push(name.to_string());
        }
        Ok(())
    }

    /// Prints the report on stdout, and saves it as `report.json` too when
    /// writing to a directory.
    pub fn finish(mut self, report: Value) -> std::io::Result<()> {
        if self.dir.is_some() {
            self.manifest.outputs.push("report.json".to_string());
        }
        let mut doc = serde_json::Map::new();
        doc.insert("manifest".into(), serde_json::to_value(&self.manifest).expect("manifest serializes"));
        doc.insert("report".into(), report);
        let text = serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes") + "\n";
        if let Some(d) = &self.dir {
            fs::write(Path::new(d).join("report.json"), &text)?;
        }
        print!("{text}");
        Ok(())
    }
}
