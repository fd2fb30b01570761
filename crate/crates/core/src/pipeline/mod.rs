//! Configuration-driven runs: fit, classify, synth, benchmark and report.

mod config;
mod fleet;
mod run;

pub use config::{FleetBlock, Mode, PipelineConfig, BUNDLED_MODEL};
pub use fleet::{prepare_fleet, read_records, regular_tracks, FleetData, FleetSettings};
pub use run::{
    load_model, load_scenario, read_assignments, run_benchmark, run_classify, run_fit, run_report, run_synth,
    write_assignments, RunSummary, INCOMPLETE,
};
