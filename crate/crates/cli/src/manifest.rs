use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::settings::{sha256_hex, Settings};
use crate::CliError;

#[derive(Debug)]
pub struct Input {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<Input>,
    pub config_hash: String,
    pub tool_version: &'static str,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub outputs: Vec<String>,
    pub details: Value,
}

impl RunManifest {
    pub fn new(command: &str, settings: &Settings) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs: Vec::new(),
            config_hash: settings.hash(command),
            tool_version: env!("CARGO_PKG_VERSION"),
            tolerances: BTreeMap::new(),
            outputs: Vec::new(),
            details: json!({ "settings": settings.entries().collect::<BTreeMap<_, _>>() }),
        }
    }

    pub fn input(&mut self, path: &str, bytes: &[u8]) {
        self.inputs.push(Input { path: path.to_string(), sha256: sha256_hex(bytes) });
    }

    pub fn detail(&mut self, key: &str, value: Value) {
        self.details[key] = value;
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs.iter().map(|i| json!({"path": i.path, "sha256": i.sha256})).collect::<Vec<_>>(),
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "tolerances": self.tolerances,
            "outputs": self.outputs,
            "details": self.details,
        })
    }
}

/// Files for one run, written together; on any write failure the ones
/// already written are removed.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn write(self, dir: &Path, mut manifest: RunManifest) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::input(format!("cannot create output directory {}: {e}", dir.display())))?;
        manifest.outputs = self.files.iter().map(|(n, _)| n.clone()).collect();
        let mut files = self.files;
        let body = serde_json::to_string_pretty(&manifest.to_json()).expect("manifest serializes");
        files.push((format!("{}.manifest.json", manifest.command), body + "\n"));
        let mut written = Vec::new();
        for (name, contents) in files {
            let path = dir.join(&name);
            if let Err(e) = std::fs::write(&path, contents) {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(CliError::input(format!("cannot write {}: {e}", path.display())));
            }
            written.push(path);
        }
        Ok(written)
    }
}
