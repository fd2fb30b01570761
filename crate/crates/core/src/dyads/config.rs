use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Minimum-duration rule applied to candidate dyads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DurationRule {
    /// Keep dyads lasting at least this many hours.
    MinHours(f64),
    /// Keep dyads at or above this percentile (0–100) of the fleet's
    /// post-crossing candidate durations.
    Percentile(f64),
}

/// Per-fleet dyad and metric parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetConfig {
    pub name: String,
    pub step_seconds: i64,
    /// Closeness threshold δ used by Prox, km.
    pub prox_delta_km: f64,
    /// A dyad's vessels must come closer than this at least once, km.
    pub crossing_delta_km: f64,
    pub duration_rule: DurationRule,
    /// DI_d exponent.
    pub beta: f64,
}

/// The six fleets with preset parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FleetPreset {
    PelagicPairTrawlers,
    LargeBottomOtterTrawlers,
    SmallBottomOtterTrawlers,
    MidWaterOtterTrawlers,
    AnchovyPurseSeiners,
    TunaPurseSeiners,
}

impl FleetPreset {
    pub const ALL: [FleetPreset; 6] = [
        FleetPreset::PelagicPairTrawlers,
        FleetPreset::LargeBottomOtterTrawlers,
        FleetPreset::SmallBottomOtterTrawlers,
        FleetPreset::MidWaterOtterTrawlers,
        FleetPreset::AnchovyPurseSeiners,
        FleetPreset::TunaPurseSeiners,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FleetPreset::PelagicPairTrawlers => "pelagic-pair-trawlers",
            FleetPreset::LargeBottomOtterTrawlers => "large-bottom-otter-trawlers",
            FleetPreset::SmallBottomOtterTrawlers => "small-bottom-otter-trawlers",
            FleetPreset::MidWaterOtterTrawlers => "mid-water-otter-trawlers",
            FleetPreset::AnchovyPurseSeiners => "anchovy-purse-seiners",
            FleetPreset::TunaPurseSeiners => "tuna-purse-seiners",
        }
    }

    pub fn config(self) -> FleetConfig {
        let hour = 3600;
        let (step_seconds, prox, crossing, rule) = match self {
            FleetPreset::PelagicPairTrawlers => (hour, 5.0, 5.0, DurationRule::MinHours(10.0)),
            FleetPreset::LargeBottomOtterTrawlers => (hour, 5.0, 5.0, DurationRule::MinHours(10.0)),
            FleetPreset::SmallBottomOtterTrawlers => (hour, 3.0, 5.0, DurationRule::MinHours(10.0)),
            FleetPreset::MidWaterOtterTrawlers => (hour, 3.0, 5.0, DurationRule::MinHours(10.0)),
            FleetPreset::AnchovyPurseSeiners => (600, 3.0, 5.0, DurationRule::MinHours(10.0)),
            FleetPreset::TunaPurseSeiners => (hour, 10.0, 60.0, DurationRule::Percentile(10.0)),
        };
        FleetConfig {
            name: self.name().to_string(),
            step_seconds,
            prox_delta_km: prox,
            crossing_delta_km: crossing,
            duration_rule: rule,
            beta: 1.0,
        }
    }
}

impl fmt::Display for FleetPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FleetPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FleetPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = FleetPreset::ALL.iter().map(|p| p.name()).collect();
                Error::config(format!("unknown fleet preset `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

impl FleetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::config(format!("fleet `{}`: {what}", self.name)));
        if self.step_seconds <= 0 {
            return bad("step_seconds must be positive");
        }
        if !(self.prox_delta_km.is_finite() && self.prox_delta_km > 0.0) {
            return bad("prox_delta_km must be a positive distance");
        }
        if !(self.crossing_delta_km.is_finite() && self.crossing_delta_km > 0.0) {
            return bad("crossing_delta_km must be a positive distance");
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad("beta must be positive");
        }
        match self.duration_rule {
            DurationRule::MinHours(h) if !(h.is_finite() && h >= 0.0) => bad("min_dyad_hours must be ≥ 0"),
            DurationRule::Percentile(p) if !(0.0..=100.0).contains(&p) => bad("percentile must lie in [0, 100]"),
            _ => Ok(()),
        }
    }
}
