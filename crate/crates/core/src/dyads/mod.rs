//! Dyad constitution: concomitant, crossing, long-enough segments of two
//! vessels' trips on a shared regular clock.

mod build;
mod config;
mod manifest;

pub use build::{
    align_pair, build_dyads, crossing_test, dyad_summary, min_distance_km, AlignedPair, Alignment, Dyad,
    DyadSource, DyadSummary, OwnedPair,
};
pub use config::{DurationRule, FleetConfig, FleetPreset};
pub use manifest::{read_manifest, write_manifest};
