//! Shared invocation context: seed, output directory, and key=value default
//! overrides from a config file.

use anyhow::{bail, Context as _, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub struct Context {
    pub seed: u64,
    out_dir: Option<PathBuf>,
    defaults: BTreeMap<String, String>,
}

impl Context {
    pub fn new(seed: u64, out_dir: Option<PathBuf>, config: Option<&Path>) -> Result<Self> {
        let mut defaults = BTreeMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    bail!("config line {}: expected key=value", lineno + 1);
                };
                defaults.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let seed = match defaults.get("seed") {
            // An explicit --seed flag wins, but the clap default of 1 is
            // overridden by a config entry.
            Some(v) if seed == 1 => v.parse().context("config seed")?,
            _ => seed,
        };
        let out_dir = out_dir.or_else(|| defaults.get("out_dir").map(PathBuf::from));
        Ok(Context {
            seed,
            out_dir,
            defaults,
        })
    }

    /// Resolve an output path against --out-dir when it has no directory
    /// component of its own.
    pub fn out_path(&self, p: &Path) -> PathBuf {
        match (&self.out_dir, p.parent()) {
            (Some(dir), Some(parent)) if parent.as_os_str().is_empty() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Option value: CLI flag, else config entry, else built-in default.
    pub fn or_default<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, fallback: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.defaults.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("config {key}: {e}")),
            None => Ok(fallback),
        }
    }
}

/// Print the machine-parseable trailer line shared by all commands.
pub fn result_line(fields: &[(&str, String)]) {
    let body: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("RESULT {}", body.join(" "));
}
