//! Simulation laboratory: synthetic designs, replicated experiments
//! comparing selection rules, sensitivity sweeps, and screening utilities.

mod design;
mod experiment;
mod metrics;
mod sweep;

pub use design::{
    build_design, sample_dataset, Covariance, DesignName, DesignOverrides, DesignSampler,
    DesignSpec, SyntheticDataset,
};
pub use experiment::{
    run_experiment, ExperimentOptions, ExperimentSummary, Method, ReplicateRecord, SummaryCell,
};
pub use metrics::{compute_metrics, irrepresentable_stat, sis_screen, ScreenResult, SelectionMetrics};
pub use sweep::{sweep_r, SweepPoint, SweepResult};
