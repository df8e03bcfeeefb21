//! Sensitivity of the path partition to the ratio threshold.
//!
//! For each replicate one path is fitted, then partitioned once per candidate
//! ratio value and once with the data-driven estimate. Errors are reported as
//! rates: false-positive rate `FP / (p - s)` and false-negative rate
//! `FN / s`, with `s` the true support size.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Result, SpspError};
use crate::grid::make_lambda_grid;
use crate::partition::{spsp_partition, PartitionOptions};
use crate::path::fit_path_with;
use crate::penalty::PenaltyConfig;
use crate::sim::design::{DesignSampler, DesignSpec};
use crate::sim::experiment::ExperimentOptions;

/// Mean error rates at one ratio value.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub r: f64,
    pub mean_fpr: f64,
    pub se_fpr: f64,
    pub mean_fnr: f64,
    pub se_fnr: f64,
}

/// Error-rate profile over a ratio grid, with the data-driven estimate as
/// the reference point.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Rates when the ratio is estimated per replicate (the default rule).
    pub at_estimated: SweepPoint,
    /// Mean of the per-replicate estimates behind `at_estimated`.
    pub mean_estimated_r: f64,
    pub replicates: usize,
    pub failed: usize,
}

fn rates(selected: &[usize], support: &[usize], p: usize) -> (f64, f64) {
    let s = support.len();
    let fp = selected
        .iter()
        .filter(|j| support.binary_search(j).is_err())
        .count();
    let fneg = support
        .iter()
        .filter(|j| selected.binary_search(j).is_err())
        .count();
    let fpr = if p > s { fp as f64 / (p - s) as f64 } else { 0.0 };
    let fnr = if s > 0 { fneg as f64 / s as f64 } else { 0.0 };
    (fpr, fnr)
}

fn summarize(r: f64, fprs: &[f64], fnrs: &[f64]) -> SweepPoint {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let se = |v: &[f64]| {
        if v.len() < 2 {
            return 0.0;
        }
        let m = mean(v);
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0);
        (var / v.len() as f64).sqrt()
    };
    SweepPoint {
        r,
        mean_fpr: mean(fprs),
        se_fpr: se(fprs),
        mean_fnr: mean(fnrs),
        se_fnr: se(fnrs),
    }
}

/// Repartitions each replicate's path at every candidate ratio and at the
/// data-driven estimate. Replicates whose path fails to fit are dropped (and
/// counted); the candidate grid must be positive and non-empty.
pub fn sweep_r(
    spec: &DesignSpec,
    penalty: &PenaltyConfig,
    r_values: &[f64],
    replicates: usize,
    base_seed: u64,
    opts: &ExperimentOptions,
) -> Result<SweepResult> {
    if r_values.is_empty() {
        return Err(SpspError::BadOverride("ratio grid is empty".into()));
    }
    if r_values.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(SpspError::BadOverride(
            "ratio grid values must be positive and finite".into(),
        ));
    }
    if replicates == 0 {
        return Err(SpspError::BadOverride("need at least one replicate".into()));
    }
    penalty.validate()?;
    let sampler = DesignSampler::new(spec)?;
    let support = spec.support();
    let p = spec.p;

    // per replicate: (fpr, fnr) per candidate, then (fpr, fnr, r) estimated
    type RepOut = Option<(Vec<(f64, f64)>, (f64, f64, f64))>;
    let outcomes: Vec<RepOut> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let seed = base_seed.wrapping_add(rep as u64);
            let ds = sampler.sample(seed);
            let data = Dataset::standardize(&ds.x, &ds.y).ok()?;
            let grid = make_lambda_grid(&data, penalty, opts.grid_k, opts.min_ratio).ok()?;
            let path = fit_path_with(&data, &grid, penalty, &opts.fit).ok()?;
            let rows = path.abs_rows();
            let mut fixed = Vec::with_capacity(r_values.len());
            for &r in r_values {
                let part = spsp_partition(
                    &rows,
                    &PartitionOptions {
                        r: Some(r),
                        fallback_r: opts.partition.fallback_r,
                    },
                )
                .ok()?;
                fixed.push(rates(&part.selected, &support, p));
            }
            let est = spsp_partition(
                &rows,
                &PartitionOptions {
                    r: None,
                    fallback_r: opts.partition.fallback_r,
                },
            )
            .ok()?;
            let (fpr, fnr) = rates(&est.selected, &support, p);
            Some((fixed, (fpr, fnr, est.r_used)))
        })
        .collect();

    let ok: Vec<_> = outcomes.into_iter().flatten().collect();
    let failed = replicates - ok.len();
    if ok.is_empty() {
        return Err(SpspError::BadGrid(
            "every replicate failed during the ratio sweep".into(),
        ));
    }

    let mut points = Vec::with_capacity(r_values.len());
    for (i, &r) in r_values.iter().enumerate() {
        let fprs: Vec<f64> = ok.iter().map(|(fixed, _)| fixed[i].0).collect();
        let fnrs: Vec<f64> = ok.iter().map(|(fixed, _)| fixed[i].1).collect();
        points.push(summarize(r, &fprs, &fnrs));
    }
    let fprs: Vec<f64> = ok.iter().map(|(_, est)| est.0).collect();
    let fnrs: Vec<f64> = ok.iter().map(|(_, est)| est.1).collect();
    let rs: Vec<f64> = ok.iter().map(|(_, est)| est.2).collect();
    let mean_estimated_r = rs.iter().sum::<f64>() / rs.len() as f64;
    let at_estimated = summarize(mean_estimated_r, &fprs, &fnrs);

    Ok(SweepResult {
        points,
        at_estimated,
        mean_estimated_r,
        replicates,
        failed,
    })
}
