//! Experiment scenarios: random placement, range synthesis, file I/O and
//! the RMSE accuracy metric.
//!
//! Files use the JSON layout
//! `{"dim", "rc", "seed", "anchors", "sensors_true"?, "range_measurements":
//! [{"i","j","r","var"}], "anchor_measurements": [{"i","j","y","var"}]}`
//! with 0-based sensor and anchor ids.

mod generate;
mod metrics;
mod model;

pub use generate::{anchor_grid, generate_runs, generate_scenario, synthesize_measurements, MAX_SEED_RETRIES};
pub use metrics::rmse;
pub use model::{
    load_scenario, parse_scenario, save_scenario, AnchorMeasurement, EstimateReport, NetworkScenario,
    RangeMeasurement,
};
