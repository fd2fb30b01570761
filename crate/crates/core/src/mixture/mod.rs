//! Three-component Gaussian mixture over (Prox, DI_θ, DI_d): density,
//! posteriors, multi-restart EM with ICL selection, Z-score ordering,
//! component overlap and fleet classification.

mod classify;
mod em;
mod model;
mod order;
mod overlap;

pub use classify::{assign_all, classify_fleet, summarise, Classification, ClusterStats};
pub use em::{
    em_fit, entropy, free_parameters, icl, icl_from_parts, EmConfig, FitOutcome, RestartStatus, RestartTrace,
    EIGEN_FLOOR_RIDGES, MIN_WEIGHT,
};
pub use model::{std_normal_peak, Assignment, Component, FitMetadata, GmmModel, FEATURES};
pub use order::order_clusters;
pub use overlap::{component_overlap, overlap, overlap_table, OverlapEstimate, DEFAULT_OVERLAP_SAMPLES};
