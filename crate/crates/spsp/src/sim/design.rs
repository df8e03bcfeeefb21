//! Benchmark regression designs and Gaussian sampling.

use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpspError};
use crate::linalg;

/// Built-in benchmark designs.
///
/// * `M1`: n=50, p=100, AR(1) correlation 0.5, three well-separated signals,
///   noise sd 3.
/// * `M2`: as `M1` with p=1000.
/// * `M3`: n=50, p=100, six signals in two tightly correlated triples
///   (within-block correlation 0.9), noise sd 3.
/// * `M4`: n=50, p=100, independent predictors, five modest signals, noise
///   sd 1, plus an unmodeled interaction between the first two predictors.
/// * `Motivating`: n=50, p=40, ten signals forming one block with pairwise
///   correlation 0.9, noise sd 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignName {
    M1,
    M2,
    M3,
    M4,
    Motivating,
}

impl DesignName {
    pub fn as_str(&self) -> &'static str {
        match self {
            DesignName::M1 => "m1",
            DesignName::M2 => "m2",
            DesignName::M3 => "m3",
            DesignName::M4 => "m4",
            DesignName::Motivating => "motivating",
        }
    }
}

impl std::str::FromStr for DesignName {
    type Err = SpspError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(DesignName::M1),
            "m2" => Ok(DesignName::M2),
            "m3" => Ok(DesignName::M3),
            "m4" => Ok(DesignName::M4),
            "motivating" => Ok(DesignName::Motivating),
            other => Err(SpspError::UnknownDesign(other.into())),
        }
    }
}

/// Predictor covariance structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Covariance {
    Identity,
    /// `Sigma[i][j] = rho^|i-j|`.
    Ar1 { rho: f64 },
    /// Leading equicorrelated blocks of the given sizes; every remaining
    /// variable is independent.
    Blocks { sizes: Vec<usize>, rho: f64 },
}

impl Covariance {
    pub fn matrix(&self, p: usize) -> Array2<f64> {
        match self {
            Covariance::Identity => Array2::eye(p),
            Covariance::Ar1 { rho } => {
                Array2::from_shape_fn((p, p), |(i, j)| rho.powi((i as i32 - j as i32).abs()))
            }
            Covariance::Blocks { sizes, rho } => {
                let mut m = Array2::eye(p);
                let mut start = 0usize;
                for &sz in sizes {
                    for i in start..(start + sz).min(p) {
                        for j in start..(start + sz).min(p) {
                            if i != j {
                                m[[i, j]] = *rho;
                            }
                        }
                    }
                    start += sz;
                }
                m
            }
        }
    }
}

/// A fully specified synthetic regression design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub name: String,
    pub n: usize,
    pub p: usize,
    /// Noise standard deviation.
    pub sigma: f64,
    /// True coefficient vector (length p).
    pub beta: Vec<f64>,
    pub covariance: Covariance,
    /// When set, the response additionally contains the elementwise product
    /// of the first two predictors, which no linear model captures.
    pub interaction: bool,
}

impl DesignSpec {
    /// Indices of the truly nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    /// Signs of the true coefficients on the support.
    pub fn support_signs(&self) -> Vec<f64> {
        self.support().iter().map(|&j| self.beta[j].signum()).collect()
    }
}

/// Optional departures from a design's published dimensions.
#[derive(Debug, Clone, Default)]
pub struct DesignOverrides {
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub sigma: Option<f64>,
}

/// Builds a benchmark design, optionally overriding n, p, or sigma. The
/// signal pattern scales with p but its leading entries are fixed, so p may
/// not be reduced below the last signal position.
pub fn build_design(name: DesignName, ov: &DesignOverrides) -> Result<DesignSpec> {
    let (n0, p0, sigma0): (usize, usize, f64) = match name {
        DesignName::M1 => (50, 100, 3.0),
        DesignName::M2 => (50, 1000, 3.0),
        DesignName::M3 => (50, 100, 3.0),
        DesignName::M4 => (50, 100, 1.0),
        DesignName::Motivating => (50, 40, 3.0),
    };
    let n = ov.n.unwrap_or(n0);
    let p = ov.p.unwrap_or(p0);
    let sigma = ov.sigma.unwrap_or(sigma0);
    if n < 2 {
        return Err(SpspError::BadOverride(format!("need n >= 2, got {n}")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(SpspError::BadOverride(format!(
            "noise sd must be positive, got {sigma}"
        )));
    }

    let head: &[f64] = match name {
        DesignName::M1 | DesignName::M2 => &[3.0, 1.5, 0.0, 0.0, 2.0],
        DesignName::M3 => &[3.0, 3.0, -2.0, 3.0, 3.0, -2.0],
        DesignName::M4 => &[1.0, -1.25, 0.75, -0.95, 1.5],
        DesignName::Motivating => &[
            3.0, 3.0, 3.0, 3.0, 3.0, -2.0, -2.0, -2.0, -2.0, -2.0,
        ],
    };
    if p < head.len() {
        return Err(SpspError::BadOverride(format!(
            "design {} needs p >= {}, got {p}",
            name.as_str(),
            head.len()
        )));
    }
    let mut beta = vec![0.0; p];
    beta[..head.len()].copy_from_slice(head);

    let covariance = match name {
        DesignName::M1 | DesignName::M2 => Covariance::Ar1 { rho: 0.5 },
        DesignName::M3 => Covariance::Blocks {
            sizes: vec![3, 3],
            rho: 0.9,
        },
        DesignName::M4 => Covariance::Identity,
        DesignName::Motivating => Covariance::Blocks {
            sizes: vec![10],
            rho: 0.9,
        },
    };

    Ok(DesignSpec {
        name: name.as_str().into(),
        n,
        p,
        sigma,
        beta,
        covariance,
        interaction: matches!(name, DesignName::M4),
    })
}

/// One sampled dataset from a design.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub spec: DesignSpec,
    pub seed: u64,
}

/// Caches the covariance factor of a design so repeated draws avoid
/// refactorizing.
pub struct DesignSampler {
    spec: DesignSpec,
    /// Transposed lower Cholesky factor of the covariance.
    lt: Array2<f64>,
}

impl DesignSampler {
    pub fn new(spec: &DesignSpec) -> Result<Self> {
        let sigma_m = spec.covariance.matrix(spec.p);
        let l = linalg::cholesky_lower(&sigma_m).ok_or_else(|| {
            SpspError::Singular("design covariance is not positive definite".into())
        })?;
        Ok(DesignSampler {
            spec: spec.clone(),
            lt: l.t().to_owned(),
        })
    }

    /// Draws predictors and response with a fixed stream order (all of `X`
    /// row-major, then the noise vector), so a seed pins the dataset exactly.
    pub fn sample(&self, seed: u64) -> SyntheticDataset {
        let spec = &self.spec;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = Array2::zeros((spec.n, spec.p));
        for i in 0..spec.n {
            for j in 0..spec.p {
                z[[i, j]] = rng.sample::<f64, _>(StandardNormal);
            }
        }
        let x = z.dot(&self.lt);
        let beta = Array1::from(spec.beta.clone());
        let mut y = x.dot(&beta);
        if spec.interaction {
            for i in 0..spec.n {
                y[i] += x[[i, 0]] * x[[i, 1]];
            }
        }
        for i in 0..spec.n {
            y[i] += spec.sigma * rng.sample::<f64, _>(StandardNormal);
        }
        SyntheticDataset {
            x,
            y,
            spec: spec.clone(),
            seed,
        }
    }
}

/// Draws one dataset; convenience wrapper over [`DesignSampler`].
pub fn sample_dataset(spec: &DesignSpec, seed: u64) -> Result<SyntheticDataset> {
    Ok(DesignSampler::new(spec)?.sample(seed))
}
