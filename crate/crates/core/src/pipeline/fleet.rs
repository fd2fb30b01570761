use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::config::FleetBlock;
use crate::dyads::{build_dyads, Dyad, FleetConfig};
use crate::ingest::{
    filter_gappy_trips, interpolate_regular, segment_trips, QcReport, RawRecord, RecordFormat, RecordReader, TrackSet,
};
use crate::metrics::{metric_table, MetricVector};
use crate::{Error, Result, Stage};

const MAX_REPORTED_REJECTIONS: usize = 100;

/// Everything needed to turn raw records into dyad metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetSettings {
    pub config: FleetConfig,
    pub max_gap_hours: f64,
    pub port_gap_hours: f64,
    pub stationary_eps_km: f64,
}

impl FleetSettings {
    pub fn new(config: FleetConfig) -> Self {
        FleetSettings {
            config,
            max_gap_hours: 3.0,
            port_gap_hours: 12.0,
            stationary_eps_km: crate::ingest::DEFAULT_STATIONARY_EPS_KM,
        }
    }

    pub fn from_block(block: &FleetBlock) -> Result<Self> {
        Ok(FleetSettings {
            config: block.fleet_config()?,
            max_gap_hours: block.max_gap_hours,
            port_gap_hours: block.port_gap_hours,
            stationary_eps_km: block.stationary_eps_km,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FleetData {
    pub settings: FleetSettings,
    pub qc: QcReport,
    pub tracks: TrackSet,
    pub dyads: Vec<Dyad>,
    pub metrics: Vec<MetricVector>,
}

/// Reads a record file, or every `*.csv` in a directory in name order.
pub fn read_records(input: &Path, format: &RecordFormat) -> Result<RecordReader> {
    let mut reader = RecordReader::new(format.clone());
    let files = if input.is_dir() {
        let mut files: Vec<_> = fs::read_dir(input)
            .map_err(|e| Error::io(input, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv") && p.is_file())
            .collect();
        files.sort();
        files
    } else {
        vec![input.to_path_buf()]
    };
    for path in files {
        let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        reader.read(std::io::BufReader::new(file), &path.display().to_string())?;
    }
    Ok(reader)
}

/// Stages A and the metric half of B: trips, gap filter, interpolation,
/// motion variables, dyads and metrics.
pub fn prepare_fleet(reader: RecordReader, settings: &FleetSettings) -> Result<FleetData> {
    let mut qc = QcReport {
        rows_read: reader.rows_read,
        rows_rejected: reader.rejections.len() as u64,
        rejected_lines: reader
            .rejections
            .iter()
            .take(MAX_REPORTED_REJECTIONS)
            .map(|r| format!("{}:{} {}", r.source, r.line, r.reason))
            .collect(),
        ..Default::default()
    };
    let tracks = regular_tracks(&reader.records, settings, &mut qc).map_err(|e| e.at(Stage::Ingest))?;
    let dyads = build_dyads(&tracks, &settings.config).map_err(|e| e.at(Stage::Dyads))?;
    let metrics = metric_table(&tracks, &dyads, &settings.config).map_err(|e| e.at(Stage::Metrics))?;
    Ok(FleetData {
        settings: settings.clone(),
        qc,
        tracks,
        dyads,
        metrics,
    })
}

pub fn regular_tracks(records: &[RawRecord], settings: &FleetSettings, qc: &mut QcReport) -> Result<TrackSet> {
    let step = settings.config.step_seconds;
    let trips = segment_trips(records, settings.port_gap_hours);
    qc.trips_total = trips.len();
    let (kept, removed_fraction) = filter_gappy_trips(trips, settings.max_gap_hours);
    qc.trips_removed = qc.trips_total - kept.len();
    qc.removed_fraction = removed_fraction;
    let interpolated: Vec<Result<_>> = kept.par_iter().map(|t| interpolate_regular(t, step)).collect();
    let mut regular = Vec::with_capacity(interpolated.len());
    for r in interpolated {
        match r {
            Ok(t) if t.fixes.len() >= 2 => regular.push(t),
            Ok(_) | Err(Error::DegenerateTrip { .. }) => qc.trips_degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    qc.trips_regular = regular.len();
    TrackSet::new(step, regular, settings.stationary_eps_km)
}
