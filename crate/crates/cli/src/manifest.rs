//! Run manifests written next to each CSV.
//!
//! The manifest is itself a config file: its `[manifest]` section records
//! provenance and the remaining sections hold the fully resolved settings,
//! so `--config <csv>.manifest` reruns the same experiment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use anyhow::{Context, Result};

use crate::settings::{Settings, MANIFEST_SECTION};

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: &'static str,
    pub seed: u64,
    pub started: SystemTime,
    pub finished: SystemTime,
    pub output: PathBuf,
    pub threads: usize,
    pub settings: Settings,
}

impl RunManifest {
    pub fn path_for(csv: &Path) -> PathBuf {
        let mut name = csv.as_os_str().to_owned();
        name.push(".manifest");
        PathBuf::from(name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[{MANIFEST_SECTION}]");
        let _ = writeln!(out, "subcommand = {}", self.subcommand);
        let _ = writeln!(out, "version = {}", self.version);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "started = {}", humantime::format_rfc3339_millis(self.started));
        let _ = writeln!(out, "finished = {}", humantime::format_rfc3339_millis(self.finished));
        let _ = writeln!(out, "output = {}", self.output.display());
        let _ = writeln!(out, "threads = {}", self.threads);
        out.push('\n');
        out.push_str(&self.settings.to_ini(false));
        out
    }

    pub fn write(&self) -> Result<PathBuf> {
        let path = Self::path_for(&self.output);
        std::fs::write(&path, self.render()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
