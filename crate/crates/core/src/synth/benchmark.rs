use std::collections::HashMap;

use serde::Serialize;

use super::generate::{generate, Scenario};
use super::spec::{PairMode, ScenarioSpec};
use crate::dyads::{Dyad, FleetPreset};
use crate::ingest::{RecordFormat, RecordReader};
use crate::mixture::{assign_all, Assignment, GmmModel};
use crate::pipeline::{prepare_fleet, FleetData, FleetSettings};
use crate::Result;

/// Planted mode against assigned cluster; `no_dyad` counts planted trip
/// pairs that never formed a dyad.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionRow {
    pub mode: PairMode,
    pub clusters: Vec<usize>,
    pub no_dyad: usize,
}

impl ConfusionRow {
    /// One-based cluster receiving most of this mode's dyads.
    pub fn dominant_cluster(&self) -> Option<usize> {
        let (k, &n) = self.clusters.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
        (n > 0).then_some(k + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub dyads: usize,
    pub planted_full_trip: usize,
    pub partner_dyads: usize,
    pub true_positives: usize,
    /// Absent with no planted full-trip pairs.
    pub recall: Option<f64>,
    /// Absent when nothing was assigned to cluster 1.
    pub precision: Option<f64>,
    pub confusion: Vec<ConfusionRow>,
}

/// Label of each trip pair assigned by the model, keyed canonically.
fn dyad_key(d: &Dyad) -> (String, String, String, String) {
    (d.vessel_a.to_string(), d.trip_a.to_string(), d.vessel_b.to_string(), d.trip_b.to_string())
}

pub fn settings_for(spec: &ScenarioSpec) -> FleetSettings {
    let (preset, delta) = match &spec.fleet {
        Some(f) => (f.preset, f.prox_delta_km),
        None => (FleetPreset::PelagicPairTrawlers, None),
    };
    let mut config = preset.config();
    config.step_seconds = spec.step_seconds;
    if let Some(d) = delta {
        config.prox_delta_km = d;
    }
    FleetSettings::new(config)
}

/// Generates the scenario, runs it through ingest, dyads, metrics and the
/// model, and scores cluster 1 against the planted full-trip pairs.
pub fn benchmark(spec: &ScenarioSpec, model: &GmmModel) -> Result<BenchmarkReport> {
    let scenario = generate(spec)?;
    let settings = settings_for(spec);
    let fleet = analyse(&scenario, &settings)?;
    let assignments = assign_all(model, &fleet.metrics)?;
    Ok(score(&scenario, &fleet.dyads, &assignments, model.g()))
}

pub fn analyse(scenario: &Scenario, settings: &FleetSettings) -> Result<FleetData> {
    let mut reader = RecordReader::new(RecordFormat::default());
    reader.rows_read = scenario.records.len() as u64;
    reader.records = scenario.records.clone();
    prepare_fleet(reader, settings)
}

pub fn score(scenario: &Scenario, dyads: &[Dyad], assignments: &[Assignment], g: usize) -> BenchmarkReport {
    let truth: HashMap<(String, String, String, String), PairMode> = scenario
        .truth
        .iter()
        .map(|t| ((t.vessel_a.clone(), t.trip_a.clone(), t.vessel_b.clone(), t.trip_b.clone()), t.mode))
        .collect();
    let modes = [PairMode::FullTrip, PairMode::Partial, PairMode::Independent];
    let mut confusion: Vec<ConfusionRow> = modes
        .iter()
        .map(|&mode| ConfusionRow {
            mode,
            clusters: vec![0; g],
            no_dyad: 0,
        })
        .collect();
    let row = |m: PairMode| modes.iter().position(|&x| x == m).expect("known mode");
    let mut seen = std::collections::HashSet::new();
    let mut tp = 0;
    let mut partner = 0;
    for a in assignments {
        let key = dyad_key(&dyads[a.dyad]);
        let mode = truth.get(&key).copied().unwrap_or(PairMode::Independent);
        confusion[row(mode)].clusters[a.label] += 1;
        if a.label == 0 {
            partner += 1;
            if mode == PairMode::FullTrip {
                tp += 1;
            }
        }
        seen.insert(key);
    }
    for (key, &mode) in &truth {
        if !seen.contains(key) {
            confusion[row(mode)].no_dyad += 1;
        }
    }
    let planted = scenario.truth.iter().filter(|t| t.mode == PairMode::FullTrip).count();
    BenchmarkReport {
        dyads: assignments.len(),
        planted_full_trip: planted,
        partner_dyads: partner,
        true_positives: tp,
        recall: (planted > 0).then(|| tp as f64 / planted as f64),
        precision: (partner > 0).then(|| tp as f64 / partner as f64),
        confusion,
    }
}

impl BenchmarkReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("benchmark report serialises")
    }
}
