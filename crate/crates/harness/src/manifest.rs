//! Run manifests, written in the config grammar so that
//! `--config manifest.txt` replays the run.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use langevin_core::ula::StepSizePlan;

use crate::config::Config;
use crate::error::Result;
use crate::output::{real, write_bytes, Written};

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    /// Effective configuration, including the seed.
    pub config: Vec<(String, String)>,
    pub plan: Option<StepSizePlan>,
    pub version: String,
    pub created_unix: u64,
    pub files: Vec<Written>,
    pub out_dir: PathBuf,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &Config, out_dir: &Path) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            config: cfg.echo(),
            plan: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            files: Vec::new(),
            out_dir: out_dir.to_path_buf(),
        }
    }

    pub fn file(&self, name: &str) -> Option<&Written> {
        self.files.iter().find(|f| f.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# run manifest; replay with --config\n");
        for (k, v) in &self.config {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s.push_str("\n[manifest]\n");
        s.push_str(&format!("command = {}\nversion = {}\ncreated_unix = {}\n", self.command, self.version, self.created_unix));
        if let Some(p) = &self.plan {
            s.push_str(&format!("plan.regime = {}\nplan.eta = {}\nplan.k = {}\n", p.regime, real(p.eta), p.k_iterations));
            for (k, v) in &p.constants {
                s.push_str(&format!("plan.constant.{k} = {}\n", real(*v)));
            }
        }
        for (i, f) in self.files.iter().enumerate() {
            s.push_str(&format!("file.{i}.name = {}\nfile.{i}.schema = {}\nfile.{i}.sha256 = {}\n", f.name, f.schema, f.sha256));
        }
        s
    }

    pub fn write(&self) -> Result<Written> {
        write_bytes(&self.out_dir, MANIFEST_FILE, "manifest/v1", self.to_text().as_bytes())
    }
}

/// The command recorded in a manifest, if the config is one.
pub fn recorded_command(cfg: &Config) -> Option<String> {
    cfg.str("manifest.command").map(str::to_string)
}
