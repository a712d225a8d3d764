//! Run configuration: command-line flags over a TOML file over defaults.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::data::ImputationStrategy;
use crate::error::{Error, Result};
use crate::estimation::SarimaSpec;
use crate::evaluation::ReportFormat;
use crate::selection::CandidateSource;
use crate::series::SplitSpec;

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_OUT_DIR: &str = "demandcast-out";

/// Settings shared by every subcommand. All optional so that unset flags
/// fall through to the config file.
#[derive(Debug, Clone, Default, Args, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Report-extract CSV.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "DEMANDCAST_OUT")]
    pub out_dir: Option<PathBuf>,

    /// count:N, frac:F or date:YYYY-MM-DD (last training day).
    #[arg(long, global = true)]
    pub split: Option<String>,

    /// Seasonal period in days.
    #[arg(long, global = true)]
    pub season: Option<usize>,

    /// Seasonal differencing order used by the stepwise search.
    #[arg(long, global = true)]
    pub seasonal_d: Option<usize>,

    /// paper-arima, paper-sarima or stepwise; repeat or comma-separate.
    #[arg(long, global = true, value_delimiter = ',')]
    pub grid: Option<Vec<String>>,

    /// Model order p,d,q or p,d,q,P,D,Q,s.
    #[arg(long, global = true)]
    pub spec: Option<String>,

    /// drop, mean, median, mode, interp or all.
    #[arg(long, global = true)]
    pub impute: Option<String>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// csv or md.
    #[arg(long, global = true)]
    pub format: Option<String>,

    /// Forecast length in days.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,

    /// Model file written by `fit`.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,

    /// Highest correlogram lag.
    #[arg(long, global = true)]
    pub max_lag: Option<usize>,

    /// Keep going when the optimizer stops before its tolerance.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub allow_nonconverged: Option<bool>,
}

impl Settings {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over `other`.
    pub fn or(self, other: Settings) -> Settings {
        Settings {
            input: self.input.or(other.input),
            out_dir: self.out_dir.or(other.out_dir),
            split: self.split.or(other.split),
            season: self.season.or(other.season),
            seasonal_d: self.seasonal_d.or(other.seasonal_d),
            grid: self.grid.or(other.grid),
            spec: self.spec.or(other.spec),
            impute: self.impute.or(other.impute),
            seed: self.seed.or(other.seed),
            format: self.format.or(other.format),
            horizon: self.horizon.or(other.horizon),
            model: self.model.or(other.model),
            max_lag: self.max_lag.or(other.max_lag),
            allow_nonconverged: self.allow_nonconverged.or(other.allow_nonconverged),
        }
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub split: SplitSpec,
    pub season: usize,
    pub seasonal_d: usize,
    pub grids: Vec<CandidateSource>,
    pub spec: Option<SarimaSpec>,
    /// Empty means all five datasets.
    pub impute: Vec<ImputationStrategy>,
    pub seed: u64,
    pub format: ReportFormat,
    pub horizon: usize,
    pub model: Option<PathBuf>,
    pub max_lag: usize,
    pub allow_nonconverged: bool,
}

/// Per-command defaults for settings whose sensible value differs by command.
#[derive(Debug, Clone, Copy)]
pub struct CommandDefaults {
    pub grids: &'static [&'static str],
    pub impute: &'static str,
}

fn parse_impute(s: &str) -> Result<Vec<ImputationStrategy>> {
    if s.trim() == "all" {
        return Ok(Vec::new());
    }
    s.split(',').map(str::parse).collect()
}

impl RunConfig {
    pub fn resolve(settings: Settings, defaults: CommandDefaults) -> Result<Self> {
        let split = match &settings.split {
            Some(s) => s.parse()?,
            None => SplitSpec::default(),
        };
        let grids = match &settings.grid {
            Some(g) => g.iter().map(|s| s.trim().parse()).collect::<Result<Vec<_>>>()?,
            None => defaults
                .grids
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<_>>>()?,
        };
        let season = settings.season.unwrap_or(7);
        if season == 0 {
            return Err(Error::InvalidArgument("season must be >= 1".into()));
        }
        Ok(Self {
            input: settings.input,
            out_dir: settings.out_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            split,
            season,
            seasonal_d: settings.seasonal_d.unwrap_or(0),
            grids,
            spec: settings.spec.as_deref().map(str::parse).transpose()?,
            impute: parse_impute(settings.impute.as_deref().unwrap_or(defaults.impute))?,
            seed: settings.seed.unwrap_or(DEFAULT_SEED),
            format: settings.format.as_deref().map(str::parse).transpose()?.unwrap_or_default(),
            horizon: settings.horizon.unwrap_or(30),
            model: settings.model,
            max_lag: settings.max_lag.unwrap_or(40),
            allow_nonconverged: settings.allow_nonconverged.unwrap_or(false),
        })
    }

    pub fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("--input is required".into()))
    }

    /// The effective configuration in config-file syntax.
    pub fn to_toml(&self) -> String {
        let settings = Settings {
            input: self.input.clone(),
            out_dir: Some(self.out_dir.clone()),
            split: Some(self.split.to_string()),
            season: Some(self.season),
            seasonal_d: Some(self.seasonal_d),
            grid: Some(self.grids.iter().map(|g| g.to_string()).collect()),
            spec: self.spec.map(|s| {
                format!(
                    "{},{},{},{},{},{},{}",
                    s.p, s.d, s.q, s.seasonal_p, s.seasonal_d, s.seasonal_q, s.period
                )
            }),
            impute: Some(if self.impute.is_empty() {
                "all".into()
            } else {
                self.impute.iter().map(|s| s.key()).collect::<Vec<_>>().join(",")
            }),
            seed: Some(self.seed),
            format: Some(self.format.to_string()),
            horizon: Some(self.horizon),
            model: self.model.clone(),
            max_lag: Some(self.max_lag),
            allow_nonconverged: Some(self.allow_nonconverged),
        };
        toml::to_string(&settings).expect("settings serialize")
    }
}
