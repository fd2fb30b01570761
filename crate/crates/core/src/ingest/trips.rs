use std::collections::HashMap;
use std::sync::Arc;

use super::{Fix, Id, RawRecord, Track};

/// Groups records into per-trip tracks.
///
/// Records carrying a trip id are grouped by `(vessel, trip)` exactly; records
/// without one are split at inter-fix gaps of at least `port_gap_hours`.
/// Output is ordered by vessel first appearance, then trip start. Duplicate
/// timestamps within a trip keep the first record.
pub fn segment_trips(records: &[RawRecord], port_gap_hours: f64) -> Vec<Track> {
    let gap = (port_gap_hours * 3600.0).ceil() as i64;
    let mut vessel_order: Vec<Id> = Vec::new();
    let mut by_vessel: HashMap<Id, Vec<&RawRecord>> = HashMap::new();
    for r in records {
        by_vessel
            .entry(r.vessel_id.clone())
            .or_insert_with(|| {
                vessel_order.push(r.vessel_id.clone());
                Vec::new()
            })
            .push(r);
    }

    let mut out = Vec::new();
    for vessel in vessel_order {
        let recs = &by_vessel[&vessel];
        let mut named: Vec<(Id, Vec<Fix>)> = Vec::new();
        let mut named_index: HashMap<Id, usize> = HashMap::new();
        let mut unnamed: Vec<Fix> = Vec::new();
        for r in recs {
            let fix = Fix::new(r.timestamp, r.lat, r.lon);
            match &r.trip_id {
                Some(trip) => {
                    let idx = *named_index.entry(trip.clone()).or_insert_with(|| {
                        named.push((trip.clone(), Vec::new()));
                        named.len() - 1
                    });
                    named[idx].1.push(fix);
                }
                None => unnamed.push(fix),
            }
        }

        let mut tracks: Vec<Track> = named
            .into_iter()
            .map(|(trip, fixes)| Track::new(vessel.clone(), trip, clean(fixes)))
            .collect();

        let unnamed = clean(unnamed);
        let mut current: Vec<Fix> = Vec::new();
        let mut auto = 0usize;
        let mut flush = |current: &mut Vec<Fix>, tracks: &mut Vec<Track>| {
            if !current.is_empty() {
                auto += 1;
                let trip: Id = Arc::from(format!("auto-{auto:03}"));
                tracks.push(Track::new(vessel.clone(), trip, std::mem::take(current)));
            }
        };
        for fix in unnamed {
            if let Some(last) = current.last() {
                if fix.timestamp - last.timestamp >= gap {
                    flush(&mut current, &mut tracks);
                }
            }
            current.push(fix);
        }
        flush(&mut current, &mut tracks);

        tracks.sort_by_key(|t| t.start());
        out.extend(tracks.into_iter().filter(|t| !t.fixes.is_empty()));
    }
    out
}

fn clean(mut fixes: Vec<Fix>) -> Vec<Fix> {
    fixes.sort_by_key(|f| f.timestamp);
    let before = fixes.len();
    fixes.dedup_by_key(|f| f.timestamp);
    if fixes.len() < before {
        log::warn!("dropped {} duplicate-timestamp fixes", before - fixes.len());
    }
    fixes
}

/// Removes every trip with a consecutive-fix lag strictly above
/// `max_gap_hours`. Returns the survivors and the removed fraction.
pub fn filter_gappy_trips(tracks: Vec<Track>, max_gap_hours: f64) -> (Vec<Track>, f64) {
    let limit = max_gap_hours * 3600.0;
    let total = tracks.len();
    let kept: Vec<Track> = tracks
        .into_iter()
        .filter(|t| (t.max_lag_seconds() as f64) <= limit)
        .collect();
    let removed_fraction = if total == 0 {
        0.0
    } else {
        (total - kept.len()) as f64 / total as f64
    };
    (kept, removed_fraction)
}
