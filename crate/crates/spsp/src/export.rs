//! Deterministic CSV and JSON writers for paths, selections, tuning traces,
//! experiment summaries, and sweeps.
//!
//! Numeric policy: lambdas, coefficients, and other solver-scale quantities
//! are printed with 12 significant digits; aggregated table entries use three
//! decimals. Nothing here depends on the clock or the environment, so a rerun
//! of the same computation produces byte-identical files.

use std::io::Write;

use serde::Serialize;

use crate::data::Dataset;
use crate::error::Result;
use crate::partition::PartitionResult;
use crate::path::CoefficientPath;
use crate::penalty::PenaltyConfig;
use crate::refit::RefitResult;
use crate::sim::{ExperimentSummary, SweepResult};
use crate::tuning::{CriterionResult, CvResult, StabilityProfile};

/// 12-significant-digit formatting for solver-scale numbers.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.11e}")
    }
}

/// Three-decimal formatting for aggregated table entries.
fn fmt3(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.3}")
    }
}

/// Minimal CSV field escaping.
pub fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `x1..xp` fallback names.
pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

fn io_err(e: std::io::Error) -> crate::error::SpspError {
    crate::error::SpspError::Io(e)
}

/// Long-format path table: one row per (lambda, variable), original scale,
/// with the intercept as a pseudo-variable.
pub fn write_path_csv<W: Write>(
    w: &mut W,
    path: &CoefficientPath,
    data: &Dataset,
    names: &[String],
) -> Result<()> {
    writeln!(w, "lambda,variable,coefficient").map_err(io_err)?;
    for k in 0..path.k() {
        let (coefs, intercept) = path.original_scale_row(k, data);
        let lam = fmt_num(path.lambdas()[k]);
        writeln!(w, "{lam},(intercept),{}", fmt_num(intercept)).map_err(io_err)?;
        for j in 0..path.p() {
            writeln!(
                w,
                "{lam},{},{}",
                csv_escape(&names[j]),
                fmt_num(coefs[j])
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PathMeta<'a> {
    penalty: &'a PenaltyConfig,
    n: usize,
    p: usize,
    grid_size: usize,
    lambda_min: f64,
    lambda_max: f64,
    max_kkt_residual: f64,
    nonzero_counts: Vec<usize>,
}

/// JSON sidecar describing a fitted path.
pub fn write_path_meta<W: Write>(w: &mut W, path: &CoefficientPath, data: &Dataset) -> Result<()> {
    let meta = PathMeta {
        penalty: path.penalty(),
        n: data.n(),
        p: data.p(),
        grid_size: path.k(),
        lambda_min: path.lambdas()[0],
        lambda_max: *path.lambdas().last().unwrap(),
        max_kkt_residual: path
            .kkt_residuals()
            .iter()
            .cloned()
            .fold(0.0f64, f64::max),
        nonzero_counts: (0..path.k()).map(|k| path.nonzero_count(k)).collect(),
    };
    serde_json::to_writer_pretty(&mut *w, &meta)
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    writeln!(w).map_err(io_err)
}

/// Boundary trace: the selection threshold at each lambda.
pub fn write_boundary_csv<W: Write>(
    w: &mut W,
    part: &PartitionResult,
    lambdas: &[f64],
) -> Result<()> {
    writeln!(w, "lambda,boundary,n_relevant").map_err(io_err)?;
    for (k, &lam) in lambdas.iter().enumerate() {
        writeln!(
            w,
            "{},{},{}",
            fmt_num(lam),
            fmt_num(part.boundary[k]),
            part.relevant_sets[k].len()
        )
        .map_err(io_err)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SelectedVariable<'a> {
    index: usize,
    name: &'a str,
    coefficient: f64,
}

#[derive(Serialize)]
struct SelectionExport<'a> {
    r_used: f64,
    r_source: &'a str,
    n_selected: usize,
    /// 1-based indices.
    selected: Vec<usize>,
    selected_names: Vec<&'a str>,
    refit_method: String,
    intercept: f64,
    coefficients: Vec<SelectedVariable<'a>>,
}

/// JSON report of a final selection with its refit (1-based indices).
pub fn write_selection_json<W: Write>(
    w: &mut W,
    part: &PartitionResult,
    rf: &RefitResult,
    names: &[String],
) -> Result<()> {
    let export = SelectionExport {
        r_used: part.r_used,
        r_source: part.r_source.as_str(),
        n_selected: part.selected.len(),
        selected: part.selected.iter().map(|&j| j + 1).collect(),
        selected_names: part.selected.iter().map(|&j| names[j].as_str()).collect(),
        refit_method: rf.method.label(),
        intercept: rf.intercept,
        coefficients: part
            .selected
            .iter()
            .map(|&j| SelectedVariable {
                index: j + 1,
                name: names[j].as_str(),
                coefficient: rf.coefs[j],
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut *w, &export)
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    writeln!(w).map_err(io_err)
}

/// Information-criterion trace with the chosen row flagged.
pub fn write_criterion_csv<W: Write>(w: &mut W, res: &CriterionResult) -> Result<()> {
    writeln!(w, "lambda,df,rss,score,chosen").map_err(io_err)?;
    for (k, s) in res.scores.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_num(s.lambda),
            s.df,
            fmt_num(s.rss),
            fmt_num(s.score),
            u8::from(k == res.chosen)
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Cross-validation trace with the chosen row flagged.
pub fn write_cv_csv<W: Write>(w: &mut W, cv: &CvResult, lambdas: &[f64]) -> Result<()> {
    writeln!(w, "lambda,cv_mse,chosen").map_err(io_err)?;
    for (k, &lam) in lambdas.iter().enumerate() {
        writeln!(
            w,
            "{},{},{}",
            fmt_num(lam),
            fmt_num(cv.mse[k]),
            u8::from(k == cv.chosen)
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Long-format stability frequencies: one row per (lambda, variable).
pub fn write_stability_csv<W: Write>(
    w: &mut W,
    prof: &StabilityProfile,
    lambdas: &[f64],
    names: &[String],
) -> Result<()> {
    writeln!(w, "lambda,variable,frequency").map_err(io_err)?;
    for (k, &lam) in lambdas.iter().enumerate() {
        for (j, name) in names.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                fmt_num(lam),
                csv_escape(name),
                fmt_num(prof.freq[[k, j]])
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Wide summary table: rows are (penalty, metric), columns are methods,
/// entries are `mean (se)` — or `median (se)` for model error. Skipped
/// combinations are left blank.
pub fn write_summary_csv<W: Write>(w: &mut W, summary: &ExperimentSummary) -> Result<()> {
    let mut penalties: Vec<&str> = Vec::new();
    let mut methods: Vec<crate::sim::Method> = Vec::new();
    for c in &summary.cells {
        if !penalties.contains(&c.penalty.as_str()) {
            penalties.push(&c.penalty);
        }
        if !methods.contains(&c.method) {
            methods.push(c.method);
        }
    }

    write!(w, "penalty,metric").map_err(io_err)?;
    for m in &methods {
        write!(w, ",{}", m.as_str()).map_err(io_err)?;
    }
    writeln!(w).map_err(io_err)?;

    type Pick = fn(&crate::sim::SummaryCell) -> (f64, f64);
    let metrics: [(&str, Pick); 3] = [
        ("fp", |c| (c.mean_fp, c.se_fp)),
        ("fn", |c| (c.mean_fn, c.se_fn)),
        ("me", |c| (c.median_me, c.se_me)),
    ];
    for pen in &penalties {
        for (metric, pick) in metrics {
            write!(w, "{},{}", csv_escape(pen), metric).map_err(io_err)?;
            for &m in &methods {
                match summary.cell(pen, m) {
                    Some(cell) => {
                        let (v, se) = pick(cell);
                        if v.is_nan() {
                            write!(w, ",").map_err(io_err)?;
                        } else {
                            write!(w, ",{} ({})", fmt3(v), fmt3(se)).map_err(io_err)?;
                        }
                    }
                    None => write!(w, ",").map_err(io_err)?,
                }
            }
            writeln!(w).map_err(io_err)?;
        }
    }
    Ok(())
}

/// Per-replicate records, one row per (replicate, penalty, method).
pub fn write_replicates_csv<W: Write>(w: &mut W, summary: &ExperimentSummary) -> Result<()> {
    writeln!(w, "replicate,penalty,method,fp,fn,me,r_used,error").map_err(io_err)?;
    for rec in &summary.records {
        match &rec.outcome {
            Ok(m) => writeln!(
                w,
                "{},{},{},{},{},{},{},",
                rec.replicate,
                csv_escape(&rec.penalty),
                rec.method.as_str(),
                m.false_positives,
                m.false_negatives,
                fmt_num(m.model_error),
                rec.r_used.map(fmt_num).unwrap_or_default()
            )
            .map_err(io_err)?,
            Err(e) => writeln!(
                w,
                "{},{},{},,,,,{}",
                rec.replicate,
                csv_escape(&rec.penalty),
                rec.method.as_str(),
                csv_escape(e)
            )
            .map_err(io_err)?,
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CellExport<'a> {
    penalty: &'a str,
    method: &'a str,
    completed: usize,
    failed: usize,
    mean_fp: f64,
    se_fp: f64,
    mean_fn: f64,
    se_fn: f64,
    median_me: f64,
    se_me: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_r: Option<f64>,
}

#[derive(Serialize)]
struct SummaryExport<'a> {
    design: &'a crate::sim::DesignSpec,
    replicates: usize,
    base_seed: u64,
    mean_irrepresentable: f64,
    cells: Vec<CellExport<'a>>,
}

/// JSON form of the full experiment summary.
pub fn write_summary_json<W: Write>(w: &mut W, summary: &ExperimentSummary) -> Result<()> {
    let export = SummaryExport {
        design: &summary.design,
        replicates: summary.replicates,
        base_seed: summary.base_seed,
        mean_irrepresentable: summary.mean_irrepresentable,
        cells: summary
            .cells
            .iter()
            .map(|c| CellExport {
                penalty: &c.penalty,
                method: c.method.as_str(),
                completed: c.completed,
                failed: c.failed,
                mean_fp: c.mean_fp,
                se_fp: c.se_fp,
                mean_fn: c.mean_fn,
                se_fn: c.se_fn,
                median_me: c.median_me,
                se_me: c.se_me,
                mean_r: c.mean_r,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut *w, &export)
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    writeln!(w).map_err(io_err)
}

/// Ratio-sweep table: error rates per candidate ratio.
pub fn write_sweep_csv<W: Write>(w: &mut W, sweep: &SweepResult) -> Result<()> {
    writeln!(w, "r,mean_fpr,se_fpr,mean_fnr,se_fnr").map_err(io_err)?;
    for pt in &sweep.points {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_num(pt.r),
            fmt_num(pt.mean_fpr),
            fmt_num(pt.se_fpr),
            fmt_num(pt.mean_fnr),
            fmt_num(pt.se_fnr)
        )
        .map_err(io_err)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepMeta {
    mean_estimated_r: f64,
    fpr_at_estimated: f64,
    se_fpr_at_estimated: f64,
    fnr_at_estimated: f64,
    se_fnr_at_estimated: f64,
    replicates: usize,
    failed: usize,
}

/// JSON sidecar with the data-driven reference point of a sweep.
pub fn write_sweep_meta<W: Write>(w: &mut W, sweep: &SweepResult) -> Result<()> {
    let meta = SweepMeta {
        mean_estimated_r: sweep.mean_estimated_r,
        fpr_at_estimated: sweep.at_estimated.mean_fpr,
        se_fpr_at_estimated: sweep.at_estimated.se_fpr,
        fnr_at_estimated: sweep.at_estimated.mean_fnr,
        se_fnr_at_estimated: sweep.at_estimated.se_fnr,
        replicates: sweep.replicates,
        failed: sweep.failed,
    };
    serde_json::to_writer_pretty(&mut *w, &meta)
        .map_err(|e| io_err(std::io::Error::other(e)))?;
    writeln!(w).map_err(io_err)
}
