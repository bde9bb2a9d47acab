use std::path::{Path, PathBuf};

use apdisc::par::Execution;
use serde::Serialize;

use crate::{write_file, Cli, CmdResult};

/// Everything needed to rerun a command. No timestamps, so identical flags
/// give an identical manifest.
#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub flags: serde_json::Value,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub execution: &'static str,
    pub timing: bool,
    pub csv_schema: Option<String>,
    pub outputs: Vec<String>,
}

#[derive(Serialize)]
pub struct Versions {
    pub apdisc_cli: &'static str,
    pub manifest: u32,
}

impl RunManifest {
    pub fn new(cli: &Cli, exec: Execution) -> Self {
        let flags = serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null);
        let subcommand = flags
            .as_object()
            .and_then(|o| o.keys().next().cloned())
            .unwrap_or_default();
        let seed = flags
            .as_object()
            .and_then(|o| o.values().next())
            .and_then(|v| v.get("seed"))
            .and_then(|v| v.as_u64());
        RunManifest {
            subcommand,
            argv: std::env::args().skip(1).collect(),
            flags,
            seed,
            versions: Versions { apdisc_cli: env!("CARGO_PKG_VERSION"), manifest: 1 },
            execution: if exec.is_parallel() { "parallel" } else { "sequential" },
            timing: false,
            csv_schema: None,
            outputs: Vec::new(),
        }
    }

    pub fn output(&mut self, path: Option<&Path>) {
        self.outputs.push(path.map_or("-".into(), |p| p.display().to_string()));
    }

    /// `<output>.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write_beside(&self, output: &Path) -> CmdResult {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(&Self::path_for(output), &(json + "\n"))
    }
}
