//! Raw position logs to regular, motion-annotated trip tracks.
//!
//! Stages: [`parse_records`] → [`segment_trips`] → [`filter_gappy_trips`] →
//! [`interpolate_regular`] → [`motion_variables`]. Every stage is a pure
//! per-trip transform.

mod interpolate;
mod motion;
mod output;
mod parse;
mod trips;

use std::sync::Arc;

pub use interpolate::interpolate_regular;
pub use motion::{motion_variables, MotionStep, DEFAULT_STATIONARY_EPS_KM};
pub use output::{write_tracks, QcReport};
pub use parse::{parse_records, RawRecord, RecordFormat, RecordReader, Rejection, TimeFormat};
pub use trips::{filter_gappy_trips, segment_trips};

use crate::geo::BoundingBox;

/// Shared, cheaply clonable identifier (vessel or trip).
pub type Id = Arc<str>;

/// One position of one vessel, timestamp in UTC epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fix {
    pub timestamp: i64,
    pub lat: f64,
    pub lon: f64,
}

impl Fix {
    pub fn new(timestamp: i64, lat: f64, lon: f64) -> Self {
        Fix { timestamp, lat, lon }
    }
}

/// Fixes of one vessel within one fishing trip.
///
/// Invariant: timestamps strictly increasing. A regular track additionally
/// has every timestamp on the epoch-anchored grid of `step_seconds`.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub vessel_id: Id,
    pub trip_id: Id,
    pub fixes: Vec<Fix>,
    pub regular: bool,
    pub step_seconds: Option<i64>,
}

impl Track {
    pub fn new(vessel_id: impl Into<Id>, trip_id: impl Into<Id>, fixes: Vec<Fix>) -> Self {
        Track {
            vessel_id: vessel_id.into(),
            trip_id: trip_id.into(),
            fixes,
            regular: false,
            step_seconds: None,
        }
    }

    pub fn start(&self) -> Option<i64> {
        self.fixes.first().map(|f| f.timestamp)
    }

    pub fn end(&self) -> Option<i64> {
        self.fixes.last().map(|f| f.timestamp)
    }

    /// Largest lag between consecutive fixes, in seconds.
    pub fn max_lag_seconds(&self) -> i64 {
        self.fixes
            .windows(2)
            .map(|w| w[1].timestamp - w[0].timestamp)
            .max()
            .unwrap_or(0)
    }

    /// Checks the regular-grid invariant.
    pub fn is_on_grid(&self, step_seconds: i64) -> bool {
        self.fixes.iter().all(|f| f.timestamp.rem_euclid(step_seconds) == 0)
            && self
                .fixes
                .windows(2)
                .all(|w| w[1].timestamp - w[0].timestamp == step_seconds)
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        BoundingBox::from_points(self.fixes.iter().map(|f| (f.lat, f.lon)))
    }
}

/// Regular tracks of one fleet together with their motion steps.
#[derive(Debug, Clone, Default)]
pub struct TrackSet {
    pub step_seconds: i64,
    pub tracks: Vec<Track>,
    /// `steps[i]` holds the motion steps of `tracks[i]` (one fewer than fixes).
    pub steps: Vec<Vec<MotionStep>>,
}

impl TrackSet {
    /// Builds the set, computing motion variables for every track.
    ///
    /// Tracks must be regular on `step_seconds`; tracks with fewer than two
    /// fixes are dropped.
    pub fn new(step_seconds: i64, tracks: Vec<Track>, stationary_eps_km: f64) -> crate::Result<Self> {
        use rayon::prelude::*;
        let tracks: Vec<Track> = tracks.into_iter().filter(|t| t.fixes.len() >= 2).collect();
        for t in &tracks {
            if !t.regular || t.step_seconds != Some(step_seconds) {
                return Err(crate::Error::config(format!(
                    "track {}/{} is not regular on a {} s grid",
                    t.vessel_id, t.trip_id, step_seconds
                )));
            }
        }
        let steps = tracks
            .par_iter()
            .map(|t| motion_variables(t, stationary_eps_km))
            .collect();
        Ok(TrackSet {
            step_seconds,
            tracks,
            steps,
        })
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }
}
