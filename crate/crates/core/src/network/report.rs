use std::io::{self, Write};

use serde::Serialize;

use super::{LoyaltyReport, PartnerNetwork};
use crate::dyads::DyadSummary;
use crate::mixture::{Classification, ClusterStats};
use crate::metrics::MetricVector;

pub const TOP_PAIRS: usize = 10;
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartnerPair {
    pub vessel_u: String,
    pub vessel_v: String,
    pub dyads: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSection {
    pub nodes: usize,
    pub edges: usize,
    pub partner_dyads: u64,
    /// Partnered vessels over vessels appearing in any dyad.
    pub vessel_participation: f64,
    pub exclusive_vessels: usize,
    pub loyalty_index: Option<f64>,
    pub components: usize,
    /// Component sizes, largest first.
    pub component_sizes: Vec<usize>,
    pub top_pairs: Vec<PartnerPair>,
}

/// Consolidated per-fleet characterisation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetReport {
    pub fleet: String,
    /// True when no dyad survived filtering.
    pub empty: bool,
    pub vessels: usize,
    pub dyads: usize,
    pub median_duration_hours: Option<f64>,
    pub clusters: Vec<ClusterStats>,
    pub network: NetworkSection,
}

pub fn fleet_report(
    fleet: &str,
    network: &PartnerNetwork,
    loyalty: &LoyaltyReport,
    summary: &DyadSummary,
    classification: &Classification,
) -> FleetReport {
    let mut pairs: Vec<PartnerPair> = network
        .edges()
        .into_iter()
        .map(|(u, v, w)| PartnerPair {
            vessel_u: network.nodes[u].to_string(),
            vessel_v: network.nodes[v].to_string(),
            dyads: w,
        })
        .collect();
    pairs.sort_by(|a, b| b.dyads.cmp(&a.dyads).then_with(|| (&a.vessel_u, &a.vessel_v).cmp(&(&b.vessel_u, &b.vessel_v))));
    let edges = pairs.len();
    pairs.truncate(TOP_PAIRS);
    let component_sizes: Vec<usize> = network.components().iter().map(Vec::len).collect();
    FleetReport {
        fleet: fleet.to_string(),
        empty: summary.dyads == 0,
        vessels: summary.vessels,
        dyads: summary.dyads,
        median_duration_hours: summary.median_duration_hours,
        clusters: classification.clusters.clone(),
        network: NetworkSection {
            nodes: network.len(),
            edges,
            partner_dyads: network.total_weight(),
            vessel_participation: if summary.vessels == 0 {
                0.0
            } else {
                network.len() as f64 / summary.vessels as f64
            },
            exclusive_vessels: loyalty.exclusive_vessels.len(),
            loyalty_index: loyalty.loyalty_index,
            components: component_sizes.len(),
            component_sizes,
            top_pairs: pairs,
        },
    }
}

impl FleetReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serialises")
    }
}

/// Per-cluster metric histograms: `cluster,feature,bin_lo,bin_hi,count`.
/// Prox and DI_d use [0, 1], DI_θ uses [−1, 1].
pub fn write_histograms<W: Write>(mut w: W, metrics: &[MetricVector], labels: &[usize], g: usize) -> io::Result<()> {
    writeln!(w, "cluster,feature,bin_lo,bin_hi,count")?;
    let ranges = [("prox", 0.0, 1.0), ("di_theta", -1.0, 1.0), ("di_d", 0.0, 1.0)];
    for k in 0..g {
        for (f, (name, lo, hi)) in ranges.into_iter().enumerate() {
            let get = |m: &MetricVector| m.features()[f];
            let mut counts = [0u64; HISTOGRAM_BINS];
            let width = (hi - lo) / HISTOGRAM_BINS as f64;
            for (m, _) in metrics.iter().zip(labels).filter(|(_, &l)| l == k) {
                let b = (((get(m) - lo) / width).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1);
                counts[b] += 1;
            }
            for (b, c) in counts.iter().enumerate() {
                let a = lo + b as f64 * width;
                writeln!(w, "{},{name},{},{},{c}", k + 1, sig(a), sig(a + width))?;
            }
        }
    }
    Ok(())
}

fn sig(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}
