//! Layered run settings: built-in defaults, then a config file, then flags.
//!
//! Config files are UTF-8 `key = value` lines grouped under `[section]`
//! headers. Every key must be known to the subcommand; a `[manifest]`
//! section (as written next to each CSV) is checked against the subcommand
//! and otherwise ignored, so a manifest can be fed back with `--config`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Section written by [`crate::manifest`] and skipped when loading.
pub const MANIFEST_SECTION: &str = "manifest";

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    doc: &'static str,
}

#[derive(Debug, Clone, Default)]
pub struct Settings {
    /// Section order as declared.
    sections: Vec<&'static str>,
    entries: BTreeMap<(String, String), Entry>,
    order: Vec<(String, String)>,
}

impl Settings {
    /// `(section, key, default, doc)` rows.
    pub fn with_defaults(rows: &[(&'static str, &'static str, &str, &'static str)]) -> Self {
        let mut s = Settings::default();
        for &(section, key, value, doc) in rows {
            if !s.sections.contains(&section) {
                s.sections.push(section);
            }
            let id = (section.to_string(), key.to_string());
            s.order.push(id.clone());
            s.entries.insert(id, Entry { value: value.to_string(), doc });
        }
        s
    }

    /// Overrides known keys from an ini file.
    pub fn merge_file(&mut self, path: &Path, subcommand: &str) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let ini = ini::Ini::load_from_str_noescape(&text).with_context(|| format!("parsing config {}", path.display()))?;
        for (section, props) in &ini {
            let Some(section) = section else {
                if props.iter().next().is_some() {
                    bail!("{}: keys must appear under a [section] header", path.display());
                }
                continue;
            };
            if section == MANIFEST_SECTION {
                if let Some(sub) = props.get("subcommand") {
                    if sub != subcommand {
                        bail!("{} is a manifest for '{sub}', not '{subcommand}'", path.display());
                    }
                }
                continue;
            }
            for (key, value) in props.iter() {
                self.set(section, key, value).with_context(|| format!("in {}", path.display()))?;
            }
        }
        Ok(())
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let entry = self
            .entries
            .get_mut(&(section.to_string(), key.to_string()))
            .ok_or_else(|| anyhow!("unknown setting [{section}] {key}"))?;
        entry.value = value.trim().to_string();
        Ok(())
    }

    /// Applies `--set section.key=value`.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (path, value) =
            assignment.split_once('=').ok_or_else(|| anyhow!("expected section.key=value, got '{assignment}'"))?;
        let (section, key) =
            path.trim().split_once('.').ok_or_else(|| anyhow!("expected section.key=value, got '{assignment}'"))?;
        self.set(section, key, value)
    }

    /// Sets the key when the flag was given.
    pub fn flag<T: ToString>(&mut self, section: &str, key: &str, value: Option<T>) -> Result<()> {
        match value {
            Some(v) => self.set(section, key, &v.to_string()),
            None => Ok(()),
        }
    }

    pub fn str(&self, section: &str, key: &str) -> &str {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|e| e.value.as_str())
            .unwrap_or_else(|| panic!("setting [{section}] {key} is not declared"))
    }

    pub fn get<T>(&self, section: &str, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        let raw = self.str(section, key);
        raw.parse::<T>().map_err(|e| anyhow!("invalid value '{raw}' for [{section}] {key}: {e}"))
    }

    /// Comma-separated list; empty entries are dropped.
    pub fn list(&self, section: &str, key: &str) -> Vec<String> {
        self.str(section, key).split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
    }

    pub fn list_of<T>(&self, section: &str, key: &str) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.list(section, key)
            .iter()
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("invalid value '{v}' in [{section}] {key}: {e}")))
            .collect()
    }

    pub fn bool(&self, section: &str, key: &str) -> Result<bool> {
        match self.str(section, key).to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            other => bail!("invalid boolean '{other}' for [{section}] {key}"),
        }
    }

    /// Grid given as `start:step:stop` (inclusive) or a comma list.
    pub fn grid(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        parse_grid(self.str(section, key)).with_context(|| format!("[{section}] {key}"))
    }

    /// The settings as an ini document, with each key's description.
    pub fn to_ini(&self, with_docs: bool) -> String {
        let mut out = String::new();
        for section in &self.sections {
            let _ = writeln!(out, "[{section}]");
            for id in self.order.iter().filter(|id| id.0 == *section) {
                let e = &self.entries[id];
                if with_docs && !e.doc.is_empty() {
                    let _ = writeln!(out, "; {}", e.doc);
                }
                let _ = writeln!(out, "{} = {}", id.1, e.value);
            }
            out.push('\n');
        }
        out
    }
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| anyhow!("bad grid '{text}': {e}")))
            .collect::<Result<_>>()?;
        let [start, step, stop] = parts[..] else {
            bail!("grid '{text}' must be start:step:stop");
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!("grid '{text}' needs a positive step and stop >= start");
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // Rounded to 12 decimals so 0.1-style steps print cleanly.
        return Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect());
    }
    text.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| anyhow!("bad grid value '{p}': {e}"))).collect()
}
