use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use funcoord::kernels::BUILTIN_IDS;
use funcoord::theorems::GridOverride;
use funcoord::{SuiteConfig, SUITES};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown output format `{other}` (expected csv or json)")),
        }
    }
}

/// Everything a command needs, merged from the config file and the flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridOverride,
    pub kernel: Option<String>,
    pub kernel_param: Option<f64>,
    pub suites: Vec<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub seed: u64,
    pub threshold: f64,
    pub invert: bool,
    pub a: Option<String>,
    pub b: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let suite = SuiteConfig::default();
        Self {
            grid: GridOverride::default(),
            kernel: None,
            kernel_param: None,
            suites: vec!["all".into()],
            tolerances: BTreeMap::new(),
            out: PathBuf::from("funcoord-out"),
            formats: vec![Format::Csv, Format::Json],
            seed: suite.seed,
            threshold: suite.threshold,
            invert: false,
            a: None,
            b: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Rejects unknown ids and non-positive tolerances.
    pub fn validate(&self) -> Result<(), CliError> {
        for s in &self.suites {
            if s != "all" && !SUITES.contains(&s.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown suite `{s}` (known: all, {})",
                    SUITES.join(", ")
                )));
            }
        }
        if let Some(k) = &self.kernel {
            if !BUILTIN_IDS.contains(&k.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown kernel `{k}` (known: {})",
                    BUILTIN_IDS.join(", ")
                )));
            }
        }
        for (key, tol) in &self.tolerances {
            if !(tol.is_finite() && *tol > 0.0) {
                return Err(CliError::Config(format!("tolerance `{key}` must be positive, got {tol}")));
            }
        }
        if let Some(n) = self.grid.n {
            if n < funcoord::grid::MIN_NODES {
                return Err(CliError::Config(format!(
                    "--n must be at least {}, got {n}",
                    funcoord::grid::MIN_NODES
                )));
            }
        }
        if let (Some(lo), Some(hi)) = (self.grid.lo, self.grid.hi) {
            if !(lo < hi) {
                return Err(CliError::Config(format!("--lo {lo} must be below --hi {hi}")));
            }
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(CliError::Config(format!("--threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if self.formats.is_empty() {
            return Err(CliError::Config("at least one output format is required".into()));
        }
        Ok(())
    }

    /// Suite ids to run, in declared order and without repeats.
    pub fn selected_suites(&self) -> Vec<&'static str> {
        if self.suites.iter().any(|s| s == "all") {
            return SUITES.to_vec();
        }
        SUITES.iter().copied().filter(|id| self.suites.iter().any(|s| s == id)).collect()
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            threshold: self.threshold,
            tolerances: self.tolerances.clone(),
            grid: self.grid,
            kernel: self.kernel.clone(),
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_ids() {
        let mut c = RunConfig { suites: vec!["fourrier".into()], ..RunConfig::default() };
        assert!(c.validate().is_err());
        c.suites = vec!["fourier".into()];
        c.kernel = Some("gauss".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        let mut c = RunConfig::default();
        c.tolerances.insert("fourier.order1.intertwining".into(), 0.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn suites_follow_declared_order() {
        let c = RunConfig { suites: vec!["riccati".into(), "fourier".into(), "riccati".into()], ..RunConfig::default() };
        assert_eq!(c.selected_suites(), vec!["fourier", "riccati"]);
    }

    #[test]
    fn config_file_round_trips() {
        let c = RunConfig { seed: 11, kernel: Some("xgauss".into()), ..RunConfig::default() };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sead": 3}"#).is_err());
    }
}
