//! Penalty families and their univariate update rules.
//!
//! All penalties are expressed for the objective
//!
//! ```text
//!   (1/n) * ||y - X b||^2  +  sum_j p_lambda(|b_j|)
//! ```
//!
//! on standardized predictors. For the convex families `p_lambda` is
//! `lambda * (alpha |b| + (1 - alpha) b^2)` (elastic net; lasso is
//! `alpha = 1`, ridge is the pure quadratic), optionally with per-coefficient
//! weights for the adaptive lasso. SCAD and MCP use their standard folded
//! concave definitions.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpspError};

/// Default SCAD concavity parameter.
pub const SCAD_A_DEFAULT: f64 = 3.7;
/// Default MCP concavity parameter.
pub const MCP_GAMMA_DEFAULT: f64 = 3.0;
/// Default exponent for adaptive-lasso weights.
pub const ADAPTIVE_POWER_DEFAULT: f64 = 1.0;
/// Cap applied to adaptive-lasso weights so that an exactly-zero initial
/// estimate does not produce an infinite weight.
pub const ADAPTIVE_WEIGHT_CAP: f64 = 1e8;

/// Penalty family together with its shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltyConfig {
    Lasso,
    /// `alpha` in (0, 1] mixes the l1 and squared terms.
    ElasticNet { alpha: f64 },
    /// Weighted l1 penalty; weights are `1 / |b_init|^power`, capped at 1e8.
    AdaptiveLasso { power: f64 },
    /// Smoothly clipped absolute deviation, requires `a > 2`.
    Scad { a: f64 },
    /// Minimax concave penalty, requires `gamma > 1`.
    Mcp { gamma: f64 },
    Ridge,
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PenaltyConfig::ElasticNet { alpha } => {
                if !(alpha > 0.0 && alpha <= 1.0) || !alpha.is_finite() {
                    return Err(SpspError::BadPenalty(format!(
                        "elastic net alpha must lie in (0, 1], got {alpha}"
                    )));
                }
            }
            PenaltyConfig::AdaptiveLasso { power } => {
                if !(power > 0.0) || !power.is_finite() {
                    return Err(SpspError::BadPenalty(format!(
                        "adaptive lasso power must be positive, got {power}"
                    )));
                }
            }
            PenaltyConfig::Scad { a } => {
                if !(a > 2.0) || !a.is_finite() {
                    return Err(SpspError::BadPenalty(format!(
                        "SCAD parameter must exceed 2, got {a}"
                    )));
                }
            }
            PenaltyConfig::Mcp { gamma } => {
                if !(gamma > 1.0) || !gamma.is_finite() {
                    return Err(SpspError::BadPenalty(format!(
                        "MCP parameter must exceed 1, got {gamma}"
                    )));
                }
            }
            PenaltyConfig::Lasso | PenaltyConfig::Ridge => {}
        }
        Ok(())
    }

    /// Weight given to the l1 part when computing the largest useful lambda.
    /// One for every family except the elastic net, where the mixing
    /// parameter rescales the threshold.
    pub fn l1_share(&self) -> f64 {
        match *self {
            PenaltyConfig::ElasticNet { alpha } => alpha,
            _ => 1.0,
        }
    }

    pub fn is_ridge(&self) -> bool {
        matches!(self, PenaltyConfig::Ridge)
    }

    /// The convex families admit exact stationarity (KKT) certificates.
    pub fn is_convex(&self) -> bool {
        !matches!(self, PenaltyConfig::Scad { .. } | PenaltyConfig::Mcp { .. })
    }

    /// Short label used in exports, e.g. `enet(0.5)`.
    pub fn label(&self) -> String {
        match *self {
            PenaltyConfig::Lasso => "lasso".into(),
            PenaltyConfig::ElasticNet { alpha } => format!("enet({alpha})"),
            PenaltyConfig::AdaptiveLasso { power } => format!("alasso({power})"),
            PenaltyConfig::Scad { a } => format!("scad({a})"),
            PenaltyConfig::Mcp { gamma } => format!("mcp({gamma})"),
            PenaltyConfig::Ridge => "ridge".into(),
        }
    }

    /// Penalty value `sum_j p_lambda(|b_j|)` for the objective; `weights`
    /// applies only to the adaptive lasso.
    pub fn value(&self, lambda: f64, beta: &[f64], weights: Option<&[f64]>) -> f64 {
        match *self {
            PenaltyConfig::Lasso => lambda * beta.iter().map(|b| b.abs()).sum::<f64>(),
            PenaltyConfig::ElasticNet { alpha } => beta
                .iter()
                .map(|b| lambda * (alpha * b.abs() + (1.0 - alpha) * b * b))
                .sum(),
            PenaltyConfig::AdaptiveLasso { .. } => {
                let w = weights.expect("adaptive lasso requires weights");
                lambda
                    * beta
                        .iter()
                        .zip(w)
                        .map(|(b, wj)| wj * b.abs())
                        .sum::<f64>()
            }
            PenaltyConfig::Scad { a } => beta.iter().map(|b| scad_value(b.abs(), lambda, a)).sum(),
            PenaltyConfig::Mcp { gamma } => {
                beta.iter().map(|b| mcp_value(b.abs(), lambda, gamma)).sum()
            }
            PenaltyConfig::Ridge => lambda * beta.iter().map(|b| b * b).sum::<f64>(),
        }
    }
}

/// Soft-thresholding operator `sign(z) * max(|z| - t, 0)`.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Minimizer of `b^2 - 2 b z + p_lambda^SCAD(|b|)` over `b` (unit curvature).
pub fn scad_update(z: f64, lambda: f64, a: f64) -> f64 {
    let az = z.abs();
    if az <= 0.5 * lambda {
        0.0
    } else if az <= 1.5 * lambda {
        z.signum() * (az - 0.5 * lambda)
    } else if az <= a * lambda {
        z.signum() * (2.0 * (a - 1.0) * az - a * lambda) / (2.0 * a - 3.0)
    } else {
        z
    }
}

/// Minimizer of `b^2 - 2 b z + p_lambda^MCP(|b|)` over `b` (unit curvature).
pub fn mcp_update(z: f64, lambda: f64, gamma: f64) -> f64 {
    let az = z.abs();
    if az <= 0.5 * lambda {
        0.0
    } else if az <= gamma * lambda {
        z.signum() * (az - 0.5 * lambda) / (1.0 - 0.5 / gamma)
    } else {
        z
    }
}

/// SCAD penalty value at `t >= 0`.
pub fn scad_value(t: f64, lambda: f64, a: f64) -> f64 {
    if t <= lambda {
        lambda * t
    } else if t <= a * lambda {
        (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0))
    } else {
        lambda * lambda * (a + 1.0) / 2.0
    }
}

/// MCP penalty value at `t >= 0`.
pub fn mcp_value(t: f64, lambda: f64, gamma: f64) -> f64 {
    if t <= gamma * lambda {
        lambda * t - t * t / (2.0 * gamma)
    } else {
        0.5 * gamma * lambda * lambda
    }
}

/// Derivative of the SCAD penalty at `t > 0`.
pub fn scad_deriv(t: f64, lambda: f64, a: f64) -> f64 {
    if t <= lambda {
        lambda
    } else if t <= a * lambda {
        (a * lambda - t) / (a - 1.0)
    } else {
        0.0
    }
}

/// Derivative of the MCP penalty at `t > 0`.
pub fn mcp_deriv(t: f64, lambda: f64, gamma: f64) -> f64 {
    (lambda - t / gamma).max(0.0)
}
