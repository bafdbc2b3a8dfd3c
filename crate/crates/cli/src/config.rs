//! Run configuration: an optional `key=value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use catalysis::config::Tolerances;

use crate::error::CliError;

/// Raw `key=value` pairs from a config file. Blank lines and `#` comments are
/// skipped; later keys override earlier ones.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "seed",
    "output",
    "n",
    "d",
    "channels",
    "x",
    "resolution",
    "replicate",
    "mc",
    "state",
    "populations",
    "energies",
    "threads",
];

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) && !key.starts_with("tol.") {
                return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", lineno + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parse `key` if present.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| CliError::Usage(format!("config: bad value for {key}: {v}"))))
            .transpose()
    }

    /// `tol.<name>` entries with the prefix stripped.
    pub fn tolerances(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().filter_map(|(k, v)| k.strip_prefix("tol.").map(|name| (name, v.as_str())))
    }
}

/// Which report to produce.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    TeleportDemo { state: String, mc_samples: usize },
    SubroutineVerify { n: usize, d: usize, channels: usize },
    AdvantageMap { resolution: f64, replicate: bool },
    SmallCatalyst { x: XChoice },
    Ergotropy { populations: Vec<f64>, energies: Vec<f64>, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XChoice {
    Optimal,
    Value(f64),
}

impl std::str::FromStr for XChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "optimal" {
            return Ok(XChoice::Optimal);
        }
        s.parse().map(XChoice::Value).map_err(|_| format!("expected `optimal` or a number, got `{s}`"))
    }
}

/// Fully resolved configuration for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub tolerances: Tolerances,
}

pub const DEFAULT_SEED: u64 = 1;
pub const MIN_MC_SAMPLES: usize = 100;

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.scenario {
            Scenario::TeleportDemo { mc_samples, .. } if *mc_samples < MIN_MC_SAMPLES => {
                Err(CliError::Usage(format!("--mc must be at least {MIN_MC_SAMPLES}")))
            }
            Scenario::AdvantageMap { resolution, .. } if !(*resolution > 0.0 && *resolution <= 0.5) => {
                Err(CliError::Usage(format!("--resolution {resolution} outside (0, 0.5]")))
            }
            Scenario::SubroutineVerify { n, d, channels } => {
                if *n < 2 {
                    return Err(CliError::Usage("--n must be at least 2".into()));
                }
                if *d < 2 {
                    return Err(CliError::Usage("--d must be at least 2".into()));
                }
                if *channels == 0 {
                    return Err(CliError::Usage("--channels must be positive".into()));
                }
                Ok(())
            }
            Scenario::Ergotropy { populations, energies, n } => {
                if populations.len() != energies.len() || populations.is_empty() {
                    return Err(CliError::Usage("--populations and --energies need the same non-zero length".into()));
                }
                if *n == 0 {
                    return Err(CliError::Usage("--n must be positive".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("not a number: `{t}`"))))
        .collect()
}

/// Apply `key=value` overrides to the default tolerances.
pub fn build_tolerances<'a>(overrides: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    for (k, v) in overrides {
        tol.set(k, v).map_err(CliError::Usage)?;
    }
    Ok(tol)
}
