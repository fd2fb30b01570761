//! Synthetic fleets with planted joint movement, and scoring of the
//! classifier against them.

mod benchmark;
mod generate;
mod spec;

pub use benchmark::{analyse, benchmark, score, settings_for, BenchmarkReport, ConfusionRow};
pub use generate::{generate, read_truth, trip_id, write_dataset, DatasetSummary, Scenario, TruthRow};
pub use spec::{EvalFleet, Kernel, PairGroups, PairMode, PairPlan, Region, ScenarioSpec, Schedule};
