//! Partner networks of cluster-1 dyads: adjacency, exclusivity, loyalty,
//! force-directed layout and per-fleet reports.

mod export;
mod graph;
mod layout;
mod report;

pub use export::{write_edge_list, write_graphml};
pub use graph::{build_network, loyalty, LoyaltyReport, PartnerNetwork};
pub use layout::{layout, DEFAULT_LAYOUT_ITERATIONS, TWO_NODE_SPREAD};
pub use report::{fleet_report, write_histograms, FleetReport, NetworkSection, PartnerPair, HISTOGRAM_BINS, TOP_PAIRS};
