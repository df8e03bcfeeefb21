//! Variable selection by partitioning penalized-regression solution paths.
//!
//! The crate fits coefficient paths for common penalties (lasso, elastic
//! net, adaptive lasso, SCAD, MCP, ridge) over a log-equidistant lambda
//! grid, then selects variables by splitting the absolute coefficients at
//! every lambda into a relevant and an irrelevant group and taking the union
//! of the relevant groups along the path. A least-squares refit on the
//! selected set produces the final estimate.
//!
//! Alongside the selector, the crate ships the standard tuning baselines it
//! is usually compared against (cross-validation, GCV, AIC/BIC/EBIC,
//! stability selection), a simulation laboratory with benchmark designs and
//! replication metrics, marginal-correlation screening for very wide data,
//! and deterministic CSV/JSON exporters.
//!
//! # Example
//!
//! ```
//! use ndarray::{Array1, Array2};
//! use spsp::{
//!     fit_path, make_lambda_grid, spsp_select, Dataset, PartitionOptions, PenaltyConfig,
//! };
//!
//! // tiny synthetic problem: y depends on the first two of four predictors
//! let n = 40;
//! let x = Array2::from_shape_fn((n, 4), |(i, j)| {
//!     ((i * (j + 3) + j * j + 1) % 17) as f64 - 8.0
//! });
//! let y = Array1::from_shape_fn(n, |i| 2.0 * x[[i, 0]] - 1.5 * x[[i, 1]] + 0.1);
//!
//! let data = Dataset::standardize(&x, &y).unwrap();
//! let grid = make_lambda_grid(&data, &PenaltyConfig::Lasso, 50, None).unwrap();
//! let path = fit_path(&data, &grid, &PenaltyConfig::Lasso).unwrap();
//! let (partition, refit) =
//!     spsp_select(&data, &path, &PartitionOptions::default(), 1e-3).unwrap();
//! assert_eq!(partition.selected, vec![0, 1]);
//! assert!(refit.coefs[0] > 1.0 && refit.coefs[1] < -1.0);
//! ```

mod data;
mod error;
pub mod export;
mod grid;
mod linalg;
mod partition;
mod path;
mod penalty;
mod refit;
pub mod sim;
mod tuning;

pub use data::Dataset;
pub use error::{Result, SpspError};
pub use grid::{default_min_ratio, lambda_max, make_lambda_grid, LambdaGrid, GRID_K_DEFAULT};
pub use partition::{
    adjacent_distances, estimate_r, partition_step, spsp_partition, try_estimate_r,
    AdjacentDistances, PartitionOptions, PartitionResult, PartitionState, RSource,
    FALLBACK_R_DEFAULT,
};
pub use path::{
    fit_path, fit_path_cold, fit_path_with, ridge_solve, stationarity_residual, AbsolutePathRow,
    CoefficientPath, FitOptions, ADAPTIVE_INIT_RIDGE_LAMBDA,
};
pub use penalty::{
    mcp_deriv, mcp_update, mcp_value, scad_deriv, scad_update, scad_value, soft_threshold,
    PenaltyConfig, ADAPTIVE_POWER_DEFAULT, ADAPTIVE_WEIGHT_CAP, MCP_GAMMA_DEFAULT, SCAD_A_DEFAULT,
};
pub use refit::{refit, RefitMethod, RefitResult, REFIT_RIDGE_LAMBDA_DEFAULT};
pub use sim::{
    build_design, compute_metrics, irrepresentable_stat, run_experiment, sample_dataset,
    sis_screen, sweep_r, Covariance, DesignName, DesignOverrides, DesignSampler, DesignSpec,
    ExperimentOptions, ExperimentSummary, Method, ReplicateRecord, ScreenResult, SelectionMetrics,
    SummaryCell, SweepPoint, SweepResult, SyntheticDataset,
};
pub use tuning::{
    cross_validate, derive_seed, information_criterion, stability_selection, CriterionKind,
    CriterionResult, CriterionScore, CvResult, StabilityProfile, CV_FOLDS_DEFAULT,
    EBIC_GAMMA_DEFAULT, STABILITY_B_DEFAULT, STABILITY_PI_DEFAULT,
};

/// Partitions a fitted path and refits on the selected set in one call.
pub fn spsp_select(
    data: &Dataset,
    path: &CoefficientPath,
    opts: &PartitionOptions,
    refit_ridge_lambda: f64,
) -> Result<(PartitionResult, RefitResult)> {
    if path.p() != data.p() {
        return Err(SpspError::DimensionMismatch(format!(
            "path has {} variables but the dataset has {}",
            path.p(),
            data.p()
        )));
    }
    let part = spsp_partition(&path.abs_rows(), opts)?;
    let rf = refit(data, &part.selected, refit_ridge_lambda)?;
    Ok((part, rf))
}
