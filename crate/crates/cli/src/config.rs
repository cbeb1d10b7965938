//! Flat `key = value` run configuration.
//!
//! Sources are layered: built-in defaults, then the `--config` file, then
//! `--set` overrides, then the dedicated flags. Every key is checked against
//! the command's key table before anything runs, so a bad configuration
//! never leaves partial output behind.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Tomo,
    Vqe,
    Drift,
    Ablate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Tomo => "tomo",
            Command::Vqe => "vqe",
            Command::Drift => "drift",
            Command::Ablate => "ablate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "tomo" => Ok(Command::Tomo),
            "vqe" => Ok(Command::Vqe),
            "drift" => Ok(Command::Drift),
            "ablate" => Ok(Command::Ablate),
            other => Err(CliError::Config(format!("unknown command {other:?}"))),
        }
    }
}

/// `None` marks a required key.
type KeyTable = &'static [(&'static str, Option<&'static str>)];

const COMMON: KeyTable = &[("seed", Some("1337")), ("shots", Some("4096")), ("convention", Some("sec5"))];

const PIPELINE: KeyTable = &[
    ("channel", None),
    ("probes", Some("minimal")),
    ("fit", Some("affine")),
    ("epsilon", Some("0.0001")),
    ("delta", Some("0.01")),
];

const TOMO: KeyTable = &[("depths", Some("1,5,10,20,50")), ("bootstrap", Some("500"))];

const DRIFT: KeyTable = &[("depth", Some("5")), ("runs", Some("10")), ("alpha", Some("0.2"))];

const OPTIMIZER: KeyTable = &[
    ("eta", Some("0.05")),
    ("tau", Some("0.001")),
    ("t_max", Some("80")),
    ("gradient", Some("parameter_shift")),
    ("fd_step", Some("0.0001")),
    ("noise", Some("dephasing:0.05")),
    ("qfim", Some("block")),
    ("entangler_rank", Some("0")),
    ("a_over_b", Some("0.71,0.68")),
    ("b", Some("1.0,0.9")),
];

const VQE: KeyTable = &[
    ("optimizers", Some("euclid,bloch_qng,wpl_qng")),
    ("drift", Some("off")),
    ("drift_amplitude", Some("0.03")),
    ("drift_period", Some("10")),
    ("drift_alpha", Some("0.2")),
];

const ABLATE: KeyTable = &[("kinds", Some("naive_inverse,tau_sweep,shot_sweep,isotropic"))];

fn tables(cmd: Command) -> Vec<KeyTable> {
    match cmd {
        Command::Tomo => vec![COMMON, PIPELINE, TOMO],
        Command::Drift => vec![COMMON, PIPELINE, DRIFT],
        Command::Vqe => vec![COMMON, OPTIMIZER, VQE],
        Command::Ablate => vec![COMMON, OPTIMIZER, ABLATE],
    }
}

/// Parses `key = value` lines; `#` starts a comment. A key without a value
/// is an error, as is a repeated key.
pub fn parse_pairs(text: &str, origin: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = parse_assignment(line).map_err(|e| CliError::Config(format!("{origin}:{}: {e}", n + 1)))?;
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(CliError::Config(format!("{origin}:{}: duplicate key {k:?}", n + 1)));
        }
        out.push((k, v));
    }
    Ok(out)
}

/// `key=value` with both sides non-empty after trimming.
pub fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(format!("missing key in {s:?}"));
    }
    if v.is_empty() {
        return Err(format!("missing value for key {k:?}"));
    }
    Ok((k.to_string(), v.to_string()))
}

/// Fully resolved settings for one command; every key has a value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Layers `layers` (lowest precedence first) over the defaults and
    /// checks that every key is known and every required key is present.
    pub fn resolve(command: Command, layers: &[Vec<(String, String)>]) -> Result<Self, CliError> {
        let tabs = tables(command);
        let mut values = BTreeMap::new();
        for (k, d) in tabs.iter().flat_map(|t| t.iter()) {
            if let Some(d) = d {
                values.insert(k.to_string(), d.to_string());
            }
        }
        for layer in layers {
            for (k, v) in layer {
                if !tabs.iter().flat_map(|t| t.iter()).any(|(name, _)| name == k) {
                    return Err(CliError::Config(format!("unknown key {k:?} for command {command}")));
                }
                values.insert(k.clone(), v.clone());
            }
        }
        for (k, d) in tabs.iter().flat_map(|t| t.iter()) {
            if d.is_none() && !values.contains_key(*k) {
                return Err(CliError::Config(format!("missing required key {k:?} for command {command}")));
            }
        }
        Ok(Self { command, values })
    }

    pub fn from_file(command: Command, path: &Path, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let file = parse_pairs(&text, &path.display().to_string())?;
        Self::resolve(command, &[file, overrides.to_vec()])
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("key {key} not in table"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse::<T>().map_err(|e| CliError::Config(format!("invalid value {raw:?} for {key}: {e}")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<T>().map_err(|e| CliError::Config(format!("invalid item {s:?} in {key}: {e}")))
            })
            .collect()
    }

    /// `exact` or a positive shot count.
    pub fn shots(&self) -> Result<Option<u64>, CliError> {
        match self.raw("shots") {
            "exact" => Ok(None),
            _ => match self.get::<u64>("shots")? {
                0 => Err(CliError::Config("shots must be positive (or \"exact\")".into())),
                n => Ok(Some(n)),
            },
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            "on" | "true" | "yes" | "1" => Ok(true),
            "off" | "false" | "no" | "0" => Ok(false),
            other => Err(CliError::Config(format!("invalid switch {other:?} for {key} (use on/off)"))),
        }
    }

    /// The resolved settings as a config file that reproduces this run.
    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
