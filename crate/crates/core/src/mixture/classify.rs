use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::model::{Assignment, GmmModel};
use crate::dyads::Dyad;
use crate::metrics::MetricVector;
use crate::util::median;
use crate::{Error, Result};

/// Table-style statistics of one cluster within a fleet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStats {
    pub cluster: usize,
    pub dyads: usize,
    pub dyad_share: f64,
    pub vessels: usize,
    pub vessel_share: f64,
    pub median_duration_hours: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub assignments: Vec<Assignment>,
    pub clusters: Vec<ClusterStats>,
    pub vessels: usize,
}

/// Posteriors for every metric vector, in input order.
pub fn assign_all(model: &GmmModel, metrics: &[MetricVector]) -> Result<Vec<Assignment>> {
    metrics
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let mut a = model.posterior(&m.features()).map_err(|e| match e {
                Error::Outlier { .. } => Error::Outlier { index: m.dyad },
                e => e,
            })?;
            a.dyad = if m.dyad == 0 { i } else { m.dyad };
            Ok(a)
        })
        .collect()
}

/// Classifies a fleet's dyads; `dyads[m.dyad]` must describe each vector.
pub fn classify_fleet(model: &GmmModel, metrics: &[MetricVector], dyads: &[Dyad]) -> Result<Classification> {
    let assignments = assign_all(model, metrics)?;
    Ok(summarise(model.g(), assignments, dyads))
}

pub fn summarise(g: usize, assignments: Vec<Assignment>, dyads: &[Dyad]) -> Classification {
    let all: BTreeSet<&str> = assignments
        .iter()
        .flat_map(|a| [&*dyads[a.dyad].vessel_a, &*dyads[a.dyad].vessel_b])
        .collect();
    let total = assignments.len();
    let clusters = (0..g)
        .map(|k| {
            let members: Vec<&Dyad> = assignments.iter().filter(|a| a.label == k).map(|a| &dyads[a.dyad]).collect();
            let vessels: BTreeSet<&str> = members.iter().flat_map(|d| [&*d.vessel_a, &*d.vessel_b]).collect();
            let durations: Vec<f64> = members.iter().map(|d| d.duration_hours()).collect();
            ClusterStats {
                cluster: k + 1,
                dyads: members.len(),
                dyad_share: share(members.len(), total),
                vessels: vessels.len(),
                vessel_share: share(vessels.len(), all.len()),
                median_duration_hours: median(&durations),
            }
        })
        .collect();
    Classification {
        assignments,
        clusters,
        vessels: all.len(),
    }
}

fn share(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}
