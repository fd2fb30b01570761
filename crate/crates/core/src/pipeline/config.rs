use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dyads::{DurationRule, FleetConfig, FleetPreset};
use crate::ingest::{RecordFormat, DEFAULT_STATIONARY_EPS_KM};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Fit,
    Classify,
}

/// Ingest and dyad parameters for one fleet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetBlock {
    pub name: String,
    pub preset: FleetPreset,
    /// A record file, or a directory whose `*.csv` files are read in name order.
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub format: RecordFormat,
    pub step_seconds: Option<i64>,
    pub prox_delta_km: Option<f64>,
    pub crossing_delta_km: Option<f64>,
    pub min_dyad_hours: Option<f64>,
    pub duration_percentile: Option<f64>,
    pub beta: Option<f64>,
    #[serde(default = "default_max_gap")]
    pub max_gap_hours: f64,
    #[serde(default = "default_port_gap")]
    pub port_gap_hours: f64,
    #[serde(default = "default_eps")]
    pub stationary_eps_km: f64,
}

fn default_max_gap() -> f64 {
    3.0
}

fn default_port_gap() -> f64 {
    12.0
}

fn default_eps() -> f64 {
    DEFAULT_STATIONARY_EPS_KM
}

impl FleetBlock {
    pub fn new(name: &str, preset: FleetPreset, input: impl Into<PathBuf>) -> Self {
        FleetBlock {
            name: name.to_string(),
            preset,
            input: Some(input.into()),
            format: RecordFormat::default(),
            step_seconds: None,
            prox_delta_km: None,
            crossing_delta_km: None,
            min_dyad_hours: None,
            duration_percentile: None,
            beta: None,
            max_gap_hours: default_max_gap(),
            port_gap_hours: default_port_gap(),
            stationary_eps_km: default_eps(),
        }
    }

    /// Preset parameters with this block's overrides applied.
    pub fn fleet_config(&self) -> Result<FleetConfig> {
        let mut c = self.preset.config();
        c.name = self.name.clone();
        if let Some(v) = self.step_seconds {
            c.step_seconds = v;
        }
        if let Some(v) = self.prox_delta_km {
            c.prox_delta_km = v;
        }
        if let Some(v) = self.crossing_delta_km {
            c.crossing_delta_km = v;
        }
        match (self.min_dyad_hours, self.duration_percentile) {
            (Some(_), Some(_)) => {
                return Err(Error::config(format!(
                    "fleet `{}`: set min_dyad_hours or duration_percentile, not both",
                    self.name
                )))
            }
            (Some(h), None) => c.duration_rule = DurationRule::MinHours(h),
            (None, Some(p)) => c.duration_rule = DurationRule::Percentile(p),
            (None, None) => {}
        }
        if let Some(v) = self.beta {
            c.beta = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// One configuration file drives a whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default = "default_verbosity")]
    pub verbosity: String,
    /// Model file for classify mode, or `bundled` for the shipped fixture.
    pub model: Option<PathBuf>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_overlap_samples")]
    pub overlap_samples: usize,
    #[serde(default = "default_layout_iterations")]
    pub layout_iterations: usize,
    #[serde(default, rename = "fleet")]
    pub fleets: Vec<FleetBlock>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_verbosity() -> String {
    "info".into()
}

fn default_restarts() -> usize {
    30
}

fn default_overlap_samples() -> usize {
    crate::mixture::DEFAULT_OVERLAP_SAMPLES
}

fn default_layout_iterations() -> usize {
    crate::network::DEFAULT_LAYOUT_ITERATIONS
}

pub const BUNDLED_MODEL: &str = "bundled";

impl PipelineConfig {
    /// Parses and validates; relative paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c: PipelineConfig = toml::from_str(text).map_err(|e| Error::config(format!("pipeline config: {e}")))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() && p.as_os_str() != BUNDLED_MODEL {
                *p = base_dir.join(&*p);
            }
        };
        resolve(&mut c.output_dir);
        if let Some(m) = c.model.as_mut() {
            resolve(m);
        }
        for f in &mut c.fleets {
            if let Some(p) = f.input.as_mut() {
                resolve(p);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Fails with a configuration error when any fleet input is missing.
    pub fn check_inputs(&self) -> Result<()> {
        for f in &self.fleets {
            if let Some(input) = f.input.as_ref().filter(|p| !p.exists()) {
                return Err(Error::config(format!("fleet `{}`: input {} does not exist", f.name, input.display())));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.fleets.is_empty() {
            return Err(Error::config("no [[fleet]] blocks"));
        }
        let mut names = std::collections::BTreeSet::new();
        for f in &self.fleets {
            if f.name.is_empty() || f.name.contains(['/', '\\']) || f.name == "." || f.name == ".." {
                return Err(Error::config(format!("fleet name `{}` cannot be used as a directory name", f.name)));
            }
            if !names.insert(&f.name) {
                return Err(Error::config(format!("fleet name `{}` is used twice", f.name)));
            }
            if f.input.is_none() {
                return Err(Error::config(format!("fleet `{}` has no input path", f.name)));
            }
            if !(f.max_gap_hours > 0.0 && f.port_gap_hours > 0.0 && f.stationary_eps_km >= 0.0) {
                return Err(Error::config(format!(
                    "fleet `{}`: max_gap_hours and port_gap_hours must be positive, stationary_eps_km non-negative",
                    f.name
                )));
            }
            f.fleet_config()?;
        }
        match self.mode {
            Mode::Fit => {
                if self.fleets.len() != 1 {
                    return Err(Error::config(format!(
                        "fit mode needs exactly one training fleet, found {}",
                        self.fleets.len()
                    )));
                }
                if self.restarts == 0 {
                    return Err(Error::config("restarts must be at least 1"));
                }
            }
            Mode::Classify => match &self.model {
                None => return Err(Error::config("classify mode needs `model` (a model file or \"bundled\")")),
                Some(p) if p.as_os_str() != BUNDLED_MODEL && !p.is_file() => {
                    return Err(Error::config(format!("model file {} is not readable", p.display())))
                }
                _ => {}
            },
        }
        if !matches!(self.verbosity.as_str(), "error" | "warn" | "info" | "debug" | "trace") {
            return Err(Error::config(format!("verbosity `{}` is not one of error, warn, info, debug, trace", self.verbosity)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIT: &str = r#"
mode = "fit"
output_dir = "out"
seed = 7

[[fleet]]
name = "pairs"
preset = "pelagic-pair-trawlers"
input = "data/records"
"#;

    #[test]
    fn parses_and_resolves() {
        let c = PipelineConfig::from_toml(FIT, Path::new("/tmp/run")).unwrap();
        assert_eq!(c.output_dir, Path::new("/tmp/run/out"));
        assert_eq!(c.fleets[0].input.as_deref(), Some(Path::new("/tmp/run/data/records")));
        assert_eq!(c.restarts, 30);
        let f = c.fleets[0].fleet_config().unwrap();
        assert_eq!((f.prox_delta_km, f.name.as_str()), (5.0, "pairs"));
    }

    #[test]
    fn rejects_bad_configs() {
        let missing = FIT.replace("input = \"data/records\"\n", "");
        assert!(matches!(PipelineConfig::from_toml(&missing, Path::new(".")), Err(Error::Config(m)) if m.contains("input")));
        let two = format!("{FIT}\n[[fleet]]\nname = \"b\"\npreset = \"tuna-purse-seiners\"\ninput = \"x\"\n");
        assert!(matches!(PipelineConfig::from_toml(&two, Path::new(".")), Err(Error::Config(m)) if m.contains("exactly one")));
        let classify = FIT.replace("\"fit\"", "\"classify\"");
        assert!(PipelineConfig::from_toml(&classify, Path::new(".")).is_err());
        let bundled = classify.replace("seed = 7", "seed = 7\nmodel = \"bundled\"");
        assert!(PipelineConfig::from_toml(&bundled, Path::new(".")).is_ok());
        let both = FIT.replace("input = \"data/records\"", "input = \"d\"\nmin_dyad_hours = 5\nduration_percentile = 10");
        assert!(PipelineConfig::from_toml(&both, Path::new(".")).is_err());
        let typo = FIT.replace("seed", "sed");
        assert!(PipelineConfig::from_toml(&typo, Path::new(".")).is_err());
    }
}
