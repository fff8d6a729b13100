//! Per-subcommand settings, merged from the config file, `--set`
//! overrides and explicit flags (in increasing priority).

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

pub const SECTIONS: [&str; 7] = [
    "solve",
    "verify_symbols",
    "scan_n",
    "gn_check",
    "diff_check",
    "threshold",
    "globalize",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSettings {
    /// `soliton` or `random`.
    pub profile: String,
    pub amplitude: f64,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub dt: f64,
    pub t_end: f64,
    pub mu: f64,
    /// Snapshots written besides `t = 0`.
    pub snapshots: usize,
    pub dealias_factor: usize,
    pub blowup_cap: f64,
    /// `csv` or `bin`.
    pub history_format: String,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            profile: "soliton".into(),
            amplitude: 1.0,
            n: 1024,
            length: 64.0,
            dt: 1e-4,
            t_end: 1.0,
            mu: -1.0,
            snapshots: 10,
            dealias_factor: 3,
            blowup_cap: 1e3,
            history_format: "csv".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    pub samples: usize,
    #[serde(rename = "N")]
    pub n_list: Vec<f64>,
    pub s: f64,
    /// `K_much` for the sextic sweep.
    pub k_much_sigma: f64,
    /// `K_much` for the ten-linear sweep.
    pub k_much_m10: f64,
    /// `sigma`, `m10` or `both`.
    pub target: String,
    pub max_spread: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            n_list: vec![32.0, 64.0, 128.0, 256.0],
            s: 0.5,
            k_much_sigma: 100.0,
            k_much_m10: 4.0,
            target: "both".into(),
            max_spread: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    #[serde(rename = "N")]
    pub n_list: Vec<f64>,
    /// Number of seeds, starting at `--seed`.
    pub seeds: u64,
    pub s: f64,
    pub t_window: f64,
    pub samples: usize,
    pub k_much: f64,
    pub profile_n: usize,
    pub profile_length: f64,
    pub j_cap: i64,
    pub mass_fraction: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            n_list: vec![8.0, 16.0, 32.0, 64.0],
            seeds: 3,
            s: 0.5,
            t_window: 0.5,
            samples: 8,
            k_much: 100.0,
            profile_n: 256,
            profile_length: 64.0,
            j_cap: 96,
            mass_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GnSettings {
    pub count: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for GnSettings {
    fn default() -> Self {
        Self {
            count: 1000,
            n: 1024,
            length: 64.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiffSettings {
    /// `index:re:im` triples separated by commas.
    pub modes: String,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub s: f64,
    pub n_index: f64,
    pub k_much: f64,
    pub h: f64,
    pub dt: f64,
    pub nonlinear: bool,
    pub tolerance: f64,
}

impl Default for DiffSettings {
    fn default() -> Self {
        Self {
            modes: "1:2.0:0.4,10:1.2:0.8,12:1.2:-0.4".into(),
            n: 128,
            length: 2.0 * std::f64::consts::PI,
            s: 0.5,
            n_index: 4.0,
            k_much: 4.0,
            h: 1e-5,
            dt: 1e-5,
            nonlinear: true,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSettings {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlobalizeSettings {
    pub s: f64,
    pub n_index: f64,
    pub t_target: f64,
    pub window: f64,
    pub steps_per_window: usize,
    pub mu: f64,
    pub max_windows: usize,
    pub mass_fraction: f64,
    pub profile_n: usize,
    pub profile_length: f64,
}

impl Default for GlobalizeSettings {
    fn default() -> Self {
        Self {
            s: 0.5,
            n_index: 32.0,
            t_target: 100.0 * 0.5 / 32f64.powi(3),
            window: 0.5,
            steps_per_window: 4,
            mu: -1.0,
            max_windows: 100_000,
            mass_fraction: 0.2,
            profile_n: 256,
            profile_length: 64.0,
        }
    }
}

/// Parses the right-hand side of `key=value` as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

fn check_section(name: &str) -> Result<()> {
    if !SECTIONS.contains(&name) {
        bail!("unknown config section '{name}' (known: {})", SECTIONS.join(", "));
    }
    Ok(())
}

/// Builds the settings of `section`.
pub fn resolve<T: DeserializeOwned + Default + Serialize>(
    section: &str,
    config: Option<&Path>,
    sets: &[String],
    flags: Table,
) -> Result<T> {
    let mut table = Table::new();
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let doc: Table = toml::from_str(&text).context("parsing config file")?;
        for (name, body) in doc {
            check_section(&name)?;
            if name == section {
                match body {
                    Value::Table(t) => table.extend(t),
                    _ => bail!("config section '{name}' must be a table"),
                }
            }
        }
    }
    for s in sets {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("override '{s}' is not key=value"))?;
        let key = key.trim();
        let key = match key.split_once('.') {
            Some((sec, k)) => {
                check_section(sec)?;
                if sec != section {
                    continue;
                }
                k
            }
            None => key,
        };
        table.insert(key.to_string(), parse_value(raw.trim()));
    }
    table.extend(flags);
    Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| anyhow!("invalid [{section}] settings: {}", e.message()))
}

/// Adds `key = value` when the flag was given.
pub fn put<V: Into<Value>>(t: &mut Table, key: &str, v: Option<V>) {
    if let Some(v) = v {
        t.insert(key.to_string(), v.into());
    }
}

pub fn put_list(t: &mut Table, key: &str, v: &[f64]) {
    if !v.is_empty() {
        t.insert(
            key.to_string(),
            Value::Array(v.iter().map(|&x| Value::Float(x)).collect()),
        );
    }
}
