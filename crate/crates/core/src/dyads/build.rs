use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{DurationRule, FleetConfig};
use crate::geo::haversine_km;
use crate::ingest::{motion_variables, Fix, Id, MotionStep, Track, TrackSet};
use crate::util::{median, percentile};
use crate::{Error, Result};

/// Index ranges of the shared timestamps of two regular tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alignment {
    pub offset_a: usize,
    pub offset_b: usize,
    /// Number of simultaneous fixes, ≥ 2.
    pub len: usize,
    pub start: i64,
}

/// Simultaneous fixes (and the steps between them) of two vessels.
/// `fixes_a[t]` and `fixes_b[t]` share a timestamp.
#[derive(Debug, Clone, Copy)]
pub struct AlignedPair<'a> {
    pub fixes_a: &'a [Fix],
    pub fixes_b: &'a [Fix],
    pub steps_a: &'a [MotionStep],
    pub steps_b: &'a [MotionStep],
}

impl<'a> AlignedPair<'a> {
    /// T, the number of simultaneous fixes.
    pub fn len(&self) -> usize {
        self.fixes_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixes_a.is_empty()
    }

    pub fn swapped(&self) -> AlignedPair<'a> {
        AlignedPair {
            fixes_a: self.fixes_b,
            fixes_b: self.fixes_a,
            steps_a: self.steps_b,
            steps_b: self.steps_a,
        }
    }

    /// Inter-vessel distance d_t in km for every simultaneous fix.
    pub fn distances(&self) -> impl Iterator<Item = f64> + 'a {
        self.fixes_a
            .iter()
            .zip(self.fixes_b)
            .map(|(a, b)| haversine_km(a.lat, a.lon, b.lat, b.lon))
    }
}

/// Owned aligned fixes, for building dyads outside a [`TrackSet`].
#[derive(Debug, Clone)]
pub struct OwnedPair {
    pub fixes_a: Vec<Fix>,
    pub fixes_b: Vec<Fix>,
    pub steps_a: Vec<MotionStep>,
    pub steps_b: Vec<MotionStep>,
}

impl OwnedPair {
    /// From two equally long `(lat, lon)` sequences on a 1-step clock.
    pub fn from_coords(a: &[(f64, f64)], b: &[(f64, f64)], stationary_eps_km: f64) -> Self {
        assert_eq!(a.len(), b.len(), "aligned sequences must have equal length");
        let mk = |pts: &[(f64, f64)]| {
            let fixes: Vec<Fix> = pts
                .iter()
                .enumerate()
                .map(|(i, &(lat, lon))| Fix::new(i as i64, lat, lon))
                .collect();
            let track = Track::new("a", "a", fixes);
            let steps = motion_variables(&track, stationary_eps_km);
            (track.fixes, steps)
        };
        let (fixes_a, steps_a) = mk(a);
        let (fixes_b, steps_b) = mk(b);
        OwnedPair {
            fixes_a,
            fixes_b,
            steps_a,
            steps_b,
        }
    }

    pub fn view(&self) -> AlignedPair<'_> {
        AlignedPair {
            fixes_a: &self.fixes_a,
            fixes_b: &self.fixes_b,
            steps_a: &self.steps_a,
            steps_b: &self.steps_b,
        }
    }
}

/// Where a dyad's fixes live inside its fleet's [`TrackSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadSource {
    pub track_a: usize,
    pub track_b: usize,
    pub offset_a: usize,
    pub offset_b: usize,
}

/// A candidate partnership: two trips of distinct vessels, aligned on a
/// shared clock. `vessel_a < vessel_b` lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Dyad {
    pub vessel_a: Id,
    pub trip_a: Id,
    pub vessel_b: Id,
    pub trip_b: Id,
    pub start: i64,
    pub n_fixes: usize,
    pub step_seconds: i64,
    pub min_distance_km: f64,
    /// Absent for dyads read back from a manifest.
    pub source: Option<DyadSource>,
}

impl Dyad {
    pub fn end(&self) -> i64 {
        self.start + (self.n_fixes as i64 - 1) * self.step_seconds
    }

    pub fn duration_hours(&self) -> f64 {
        (self.n_fixes as f64 - 1.0) * self.step_seconds as f64 / 3600.0
    }

    /// Borrowed simultaneous fixes, when the dyad still refers to `set`.
    pub fn view<'a>(&self, set: &'a TrackSet) -> Option<AlignedPair<'a>> {
        let s = self.source?;
        let n = self.n_fixes;
        Some(AlignedPair {
            fixes_a: set.tracks.get(s.track_a)?.fixes.get(s.offset_a..s.offset_a + n)?,
            fixes_b: set.tracks.get(s.track_b)?.fixes.get(s.offset_b..s.offset_b + n)?,
            steps_a: set.steps.get(s.track_a)?.get(s.offset_a..s.offset_a + n - 1)?,
            steps_b: set.steps.get(s.track_b)?.get(s.offset_b..s.offset_b + n - 1)?,
        })
    }
}

/// Shared timestamps of two regular tracks; `None` below two common fixes.
pub fn align_pair(track_a: &Track, track_b: &Track) -> Result<Option<Alignment>> {
    let step = match (track_a.step_seconds, track_b.step_seconds) {
        (Some(a), Some(b)) if a == b && track_a.regular && track_b.regular => a,
        (a, b) => {
            return Err(Error::config(format!(
                "cannot align tracks with steps {a:?} and {b:?}; both must be regular on the same grid"
            )))
        }
    };
    let (Some(sa), Some(ea), Some(sb), Some(eb)) = (track_a.start(), track_a.end(), track_b.start(), track_b.end())
    else {
        return Ok(None);
    };
    Ok(overlap(sa, ea, sb, eb, step))
}

fn overlap(sa: i64, ea: i64, sb: i64, eb: i64, step: i64) -> Option<Alignment> {
    let lo = sa.max(sb);
    let hi = ea.min(eb);
    if hi - lo < step {
        return None;
    }
    Some(Alignment {
        offset_a: ((lo - sa) / step) as usize,
        offset_b: ((lo - sb) / step) as usize,
        len: ((hi - lo) / step + 1) as usize,
        start: lo,
    })
}

pub fn min_distance_km(pair: &AlignedPair) -> f64 {
    pair.distances().fold(f64::INFINITY, f64::min)
}

/// True iff the vessels come strictly closer than `crossing_delta_km` at
/// some simultaneous fix.
pub fn crossing_test(pair: &AlignedPair, crossing_delta_km: f64) -> bool {
    pair.distances().any(|d| d < crossing_delta_km)
}

/// Enumerates, aligns and filters every trip pair of distinct vessels.
///
/// Time overlap and bounding boxes are screened before any distance is
/// computed. The crossing test runs before the duration rule, so a
/// percentile rule is evaluated on post-crossing candidates. Output is in
/// canonical `(vessel_a, vessel_b, start)` order.
pub fn build_dyads(set: &TrackSet, config: &FleetConfig) -> Result<Vec<Dyad>> {
    config.validate()?;
    if !set.tracks.is_empty() && set.step_seconds != config.step_seconds {
        return Err(Error::config(format!(
            "fleet `{}` expects a {} s grid but tracks are on {} s",
            config.name, config.step_seconds, set.step_seconds
        )));
    }
    let step = config.step_seconds;
    let tracks = &set.tracks;
    let boxes: Vec<_> = tracks.iter().map(|t| t.bounding_box()).collect();
    let mut order: Vec<usize> = (0..tracks.len()).filter(|&i| tracks[i].fixes.len() >= 2).collect();
    order.sort_by_key(|&i| (tracks[i].start(), i));
    let starts: Vec<i64> = order.iter().map(|&i| tracks[i].fixes[0].timestamp).collect();
    let min_fixes = match config.duration_rule {
        // (T - 1) Δt / 3600 ≥ h
        DurationRule::MinHours(h) => ((h * 3600.0 / step as f64) - 1e-9).ceil().max(1.0) as usize + 1,
        DurationRule::Percentile(_) => 2,
    };

    let mut candidates: Vec<Dyad> = (0..order.len())
        .into_par_iter()
        .flat_map_iter(|p| {
            let i = order[p];
            let ti = &tracks[i];
            let end_i = ti.fixes.last().map(|f| f.timestamp).unwrap_or(i64::MIN);
            let mut found = Vec::new();
            for (q, &start_j) in starts.iter().enumerate().skip(p + 1) {
                if start_j > end_i - step {
                    break;
                }
                let j = order[q];
                let tj = &tracks[j];
                if ti.vessel_id == tj.vessel_id {
                    continue;
                }
                let end_j = tj.fixes.last().map(|f| f.timestamp).unwrap_or(i64::MIN);
                let Some(al) = overlap(ti.fixes[0].timestamp, end_i, start_j, end_j, step) else {
                    continue;
                };
                if al.len < min_fixes {
                    continue;
                }
                if let (Some(bi), Some(bj)) = (&boxes[i], &boxes[j]) {
                    if bi.min_distance_km(bj) >= config.crossing_delta_km {
                        continue;
                    }
                }
                let pair = AlignedPair {
                    fixes_a: &ti.fixes[al.offset_a..al.offset_a + al.len],
                    fixes_b: &tj.fixes[al.offset_b..al.offset_b + al.len],
                    steps_a: &[],
                    steps_b: &[],
                };
                let dmin = min_distance_km(&pair);
                if dmin < config.crossing_delta_km {
                    found.push(make_dyad(set, i, j, al, dmin));
                }
            }
            found
        })
        .collect();

    if let DurationRule::Percentile(p) = config.duration_rule {
        let durations: Vec<f64> = candidates.iter().map(Dyad::duration_hours).collect();
        if let Some(threshold) = percentile(&durations, p) {
            candidates.retain(|d| d.duration_hours() >= threshold);
        }
    } else if let DurationRule::MinHours(h) = config.duration_rule {
        candidates.retain(|d| d.duration_hours() >= h);
    }

    candidates.sort_by(|x, y| {
        (&x.vessel_a, &x.vessel_b, x.start, &x.trip_a, &x.trip_b).cmp(&(&y.vessel_a, &y.vessel_b, y.start, &y.trip_a, &y.trip_b))
    });
    Ok(candidates)
}

fn make_dyad(set: &TrackSet, i: usize, j: usize, al: Alignment, dmin: f64) -> Dyad {
    let (ti, tj) = (&set.tracks[i], &set.tracks[j]);
    let (a, b, oa, ob) = if ti.vessel_id <= tj.vessel_id {
        (i, j, al.offset_a, al.offset_b)
    } else {
        (j, i, al.offset_b, al.offset_a)
    };
    Dyad {
        vessel_a: set.tracks[a].vessel_id.clone(),
        trip_a: set.tracks[a].trip_id.clone(),
        vessel_b: set.tracks[b].vessel_id.clone(),
        trip_b: set.tracks[b].trip_id.clone(),
        start: al.start,
        n_fixes: al.len,
        step_seconds: set.step_seconds,
        min_distance_km: dmin,
        source: Some(DyadSource {
            track_a: a,
            track_b: b,
            offset_a: oa,
            offset_b: ob,
        }),
    }
}

/// Vessel count, dyad count and median dyad duration of one fleet.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DyadSummary {
    pub vessels: usize,
    pub dyads: usize,
    pub median_duration_hours: Option<f64>,
}

pub fn dyad_summary(dyads: &[Dyad]) -> DyadSummary {
    let vessels: BTreeSet<&str> = dyads
        .iter()
        .flat_map(|d| [&*d.vessel_a, &*d.vessel_b])
        .collect();
    let durations: Vec<f64> = dyads.iter().map(Dyad::duration_hours).collect();
    DyadSummary {
        vessels: vessels.len(),
        dyads: dyads.len(),
        median_duration_hours: median(&durations),
    }
}
