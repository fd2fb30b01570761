use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{MotionStep, Track};
use crate::util::format_timestamp;

/// Ingest quality-control counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    pub rows_read: u64,
    pub rows_rejected: u64,
    /// `source:line reason`, capped at the first 100 entries.
    pub rejected_lines: Vec<String>,
    pub trips_total: usize,
    pub trips_removed: usize,
    pub removed_fraction: f64,
    pub trips_degenerate: usize,
    pub trips_regular: usize,
}

/// Writes regular tracks with their motion variables. The last fix of each
/// track has empty step columns.
pub fn write_tracks<W: Write>(mut w: W, tracks: &[Track], steps: &[Vec<MotionStep>]) -> std::io::Result<()> {
    writeln!(w, "vessel_id,trip_id,timestamp,lat,lon,displacement_km,heading_rad,stationary")?;
    for (track, steps) in tracks.iter().zip(steps) {
        for (i, f) in track.fixes.iter().enumerate() {
            write!(
                w,
                "{},{},{},{},{}",
                track.vessel_id,
                track.trip_id,
                format_timestamp(f.timestamp),
                f.lat,
                f.lon
            )?;
            match steps.get(i) {
                Some(s) => {
                    let heading = s.heading_rad.map(|h| h.to_string()).unwrap_or_default();
                    writeln!(w, ",{},{},{}", s.displacement_km, heading, s.stationary)?;
                }
                None => writeln!(w, ",,,")?,
            }
        }
    }
    Ok(())
}
