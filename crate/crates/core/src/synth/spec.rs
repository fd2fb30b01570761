use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dyads::FleetPreset;
use crate::util::parse_timestamp;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairMode {
    FullTrip,
    Partial,
    Independent,
}

impl PairMode {
    pub fn name(self) -> &'static str {
        match self {
            PairMode::FullTrip => "full-trip",
            PairMode::Partial => "partial",
            PairMode::Independent => "independent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [PairMode::FullTrip, PairMode::Partial, PairMode::Independent]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub trips_per_vessel: usize,
    /// Uniform trip duration range, hours.
    pub trip_hours: [f64; 2],
    /// Uniform in-port interval range, hours.
    pub port_hours: [f64; 2],
    /// First departures are spread uniformly over this many hours.
    #[serde(default)]
    pub start_spread_hours: f64,
}

/// Correlated random walk: log-normal step lengths, wrapped-Cauchy turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kernel {
    /// Median distance covered between consecutive records, km.
    pub median_step_km: f64,
    #[serde(default = "default_log_sd")]
    pub step_log_sd: f64,
    /// Mean resultant length of the turning angle, in [0, 1).
    #[serde(default = "default_rho")]
    pub turning_rho: f64,
}

fn default_log_sd() -> f64 {
    0.3
}

fn default_rho() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairPlan {
    pub a: String,
    pub b: String,
    pub mode: PairMode,
    /// Positional jitter σ of the follower, km.
    #[serde(default)]
    pub noise_km: f64,
    /// Shared sub-window of each trip, as fractions of its duration.
    #[serde(default = "default_window")]
    pub window: [f64; 2],
}

fn default_window() -> [f64; 2] {
    [0.3, 0.7]
}

/// Pairs drawn automatically from consecutive vessel ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairGroups {
    #[serde(default)]
    pub full_trip: usize,
    #[serde(default)]
    pub partial: usize,
    #[serde(default)]
    pub noise_km: f64,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
}

impl Default for PairGroups {
    fn default() -> Self {
        PairGroups {
            full_trip: 0,
            partial: 0,
            noise_km: 0.0,
            window: default_window(),
        }
    }
}

/// Evaluation fleet for `benchmark`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalFleet {
    pub preset: FleetPreset,
    #[serde(default)]
    pub prox_delta_km: Option<f64>,
    /// Model file for `benchmark`; the bundled model when absent.
    #[serde(default)]
    pub model: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub vessels: usize,
    /// Interval between raw records, seconds.
    pub step_seconds: i64,
    /// RFC 3339 season start.
    pub start: String,
    /// Raw record times are displaced by up to this many seconds.
    #[serde(default)]
    pub record_jitter_seconds: i64,
    pub region: Region,
    pub schedule: Schedule,
    pub kernel: Kernel,
    #[serde(default)]
    pub pairs: Vec<PairPlan>,
    #[serde(default)]
    pub pair_groups: PairGroups,
    #[serde(default)]
    pub fleet: Option<EvalFleet>,
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| Error::config(format!("scenario spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn vessel_id(index: usize) -> String {
        format!("V{:04}", index + 1)
    }

    pub fn start_epoch(&self) -> Result<i64> {
        parse_timestamp(&self.start).ok_or_else(|| Error::config(format!("start: `{}` is not a timestamp", self.start)))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::config(format!("{field}: {why}")));
        if self.vessels == 0 {
            return bad("vessels", "must be at least 1".into());
        }
        if self.step_seconds <= 0 {
            return bad("step_seconds", "must be positive".into());
        }
        self.start_epoch()?;
        if self.record_jitter_seconds < 0 || 2 * self.record_jitter_seconds >= self.step_seconds {
            return bad("record_jitter_seconds", "must be in [0, step_seconds / 2)".into());
        }
        let r = &self.region;
        if !(r.lat_min < r.lat_max && r.lat_min >= -80.0 && r.lat_max <= 80.0) {
            return bad("region", "needs lat_min < lat_max within [-80, 80]".into());
        }
        if !(r.lon_min < r.lon_max && r.lon_min >= -180.0 && r.lon_max <= 180.0) {
            return bad("region", "needs lon_min < lon_max within [-180, 180]".into());
        }
        let s = &self.schedule;
        if s.trips_per_vessel == 0 {
            return bad("schedule.trips_per_vessel", "must be at least 1".into());
        }
        let step_h = self.step_seconds as f64 / 3600.0;
        if !(s.trip_hours[0] >= 2.0 * step_h && s.trip_hours[0] <= s.trip_hours[1]) {
            return bad(
                "schedule.trip_hours",
                format!("needs {} <= min <= max; shorter trips hold no shared fixes", 2.0 * step_h),
            );
        }
        if !(s.port_hours[0] >= 0.0 && s.port_hours[0] <= s.port_hours[1]) {
            return bad("schedule.port_hours", "needs 0 <= min <= max".into());
        }
        if !(s.start_spread_hours >= 0.0 && s.start_spread_hours.is_finite()) {
            return bad("schedule.start_spread_hours", "must be non-negative".into());
        }
        let k = &self.kernel;
        if !(k.median_step_km > 0.0 && k.median_step_km.is_finite()) {
            return bad("kernel.median_step_km", "must be positive".into());
        }
        if !(k.step_log_sd >= 0.0 && k.step_log_sd.is_finite()) {
            return bad("kernel.step_log_sd", "must be non-negative".into());
        }
        if !(0.0..1.0).contains(&k.turning_rho) {
            return bad("kernel.turning_rho", "must be in [0, 1)".into());
        }
        let g = &self.pair_groups;
        if 2 * (g.full_trip + g.partial) > self.vessels {
            return bad(
                "pair_groups",
                format!("{} pairs need {} vessels but only {} exist", g.full_trip + g.partial, 2 * (g.full_trip + g.partial), self.vessels),
            );
        }
        check_noise_window("pair_groups", g.noise_km, g.window)?;
        let mut used = BTreeSet::new();
        for (a, b) in self.auto_pairs().iter().map(|p| (p.a.clone(), p.b.clone())) {
            used.insert(a);
            used.insert(b);
        }
        for (i, p) in self.pairs.iter().enumerate() {
            let field = format!("pairs[{i}]");
            for v in [&p.a, &p.b] {
                if self.vessel_index(v).is_none() {
                    return bad(&field, format!("vessel `{v}` is not in the scenario (V0001..{})", Self::vessel_id(self.vessels - 1)));
                }
                if !used.insert(v.clone()) {
                    return bad(&field, format!("vessel `{v}` already belongs to another pair"));
                }
            }
            if p.a == p.b {
                return bad(&field, "a vessel cannot pair with itself".into());
            }
            check_noise_window(&field, p.noise_km, p.window)?;
        }
        Ok(())
    }

    pub fn vessel_index(&self, id: &str) -> Option<usize> {
        let n: usize = id.strip_prefix('V')?.parse().ok()?;
        (n >= 1 && n <= self.vessels && Self::vessel_id(n - 1) == id).then(|| n - 1)
    }

    fn auto_pairs(&self) -> Vec<PairPlan> {
        let g = &self.pair_groups;
        (0..g.full_trip + g.partial)
            .map(|k| PairPlan {
                a: Self::vessel_id(2 * k),
                b: Self::vessel_id(2 * k + 1),
                mode: if k < g.full_trip { PairMode::FullTrip } else { PairMode::Partial },
                noise_km: g.noise_km,
                window: g.window,
            })
            .collect()
    }

    /// Every planned pair keyed by follower index: `b -> (a, plan)`.
    pub fn plan(&self) -> BTreeMap<usize, (usize, PairPlan)> {
        self.auto_pairs()
            .into_iter()
            .chain(self.pairs.iter().cloned())
            .filter_map(|p| Some((self.vessel_index(&p.b)?, (self.vessel_index(&p.a)?, p))))
            .collect()
    }
}

fn check_noise_window(field: &str, noise: f64, window: [f64; 2]) -> Result<()> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::config(format!("{field}.noise_km: must be non-negative")));
    }
    if !(0.0 <= window[0] && window[0] < window[1] && window[1] <= 1.0) {
        return Err(Error::config(format!("{field}.window: needs 0 <= start < end <= 1")));
    }
    Ok(())
}
