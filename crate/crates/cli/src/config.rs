use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use heun_spectra::floquet::ConnectionConfig;
use heun_spectra::shooting::ShootingConfig;

use crate::cli::{Format, Method};
use crate::error::{CliError, CliResult};

pub const THREADS_VAR: &str = "HEUN_SPECTRA_THREADS";

const KEYS: [&str; 11] = [
    "Z",
    "method",
    "format",
    "N",
    "threads",
    "rk_tolerance",
    "series_tolerance",
    "energy_tolerance",
    "mu_step",
    "max_half_width",
    "cross_tolerance",
];

/// Values read from a `key=value` file.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::Usage(format!("config line {}: unknown key {key}", i + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    fn number<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("config key {key}: invalid value {v}")))
            })
            .transpose()
    }

    fn choice<T: ValueEnum>(&self, key: &str) -> CliResult<Option<T>> {
        self.values
            .get(key)
            .map(|v| T::from_str(v, true).map_err(|_| CliError::Usage(format!("config key {key}: invalid value {v}"))))
            .transpose()
    }
}

/// Effective settings after applying flags over the config file over defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub charge: f64,
    pub method: Method,
    pub format: Format,
    pub half_width: usize,
    pub threads: Option<usize>,
    pub cross_tolerance: f64,
    pub shooting: ShootingConfig,
    pub connection: ConnectionConfig,
}

/// Flags that may override config values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub charge: Option<f64>,
    pub method: Option<Method>,
    pub format: Option<Format>,
    pub half_width: Option<usize>,
}

impl Settings {
    pub fn resolve(file: &ConfigFile, flags: Overrides, env_threads: Option<&str>) -> CliResult<Self> {
        let mut shooting = ShootingConfig::default();
        let mut connection = ConnectionConfig::default();
        if let Some(t) = file.number("rk_tolerance")? {
            shooting.rk_tolerance = t;
        }
        if let Some(t) = file.number("series_tolerance")? {
            shooting.series_tolerance = t;
            connection.series_tolerance = t;
        }
        if let Some(t) = file.number("energy_tolerance")? {
            connection.energy_tolerance = t;
        }
        if let Some(s) = file.number("mu_step")? {
            shooting.mu_step = s;
            connection.mu_step = s;
        }
        if let Some(n) = file.number("max_half_width")? {
            connection.max_half_width = n;
        }
        let env_threads = env_threads
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR}: expected a positive integer, got {v}")))
            })
            .transpose()?;
        let settings = Self {
            charge: flags.charge.or(file.number("Z")?).unwrap_or(1.0),
            method: flags.method.or(file.choice("method")?).unwrap_or(Method::Shooting),
            format: flags.format.or(file.choice("format")?).unwrap_or(Format::Text),
            half_width: flags.half_width.or(file.number("N")?).unwrap_or(20),
            threads: env_threads.or(file.number("threads")?),
            cross_tolerance: file.number("cross_tolerance")?.unwrap_or(1e-9),
            shooting,
            connection,
        };
        settings
            .shooting
            .validate()
            .map_err(|e| CliError::Usage(format!("invalid shooting settings: {e}")))?;
        if !(settings.connection.series_tolerance > 0.0 && settings.connection.energy_tolerance > 0.0) {
            return Err(CliError::Usage("tolerances must be positive".into()));
        }
        if !(settings.connection.mu_step > 0.0 && settings.cross_tolerance > 0.0) {
            return Err(CliError::Usage("mu_step and cross_tolerance must be positive".into()));
        }
        if settings.threads == Some(0) {
            return Err(CliError::Usage("threads must be positive".into()));
        }
        Ok(settings)
    }
}
