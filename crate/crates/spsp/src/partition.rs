//! Selection by partitioning the solution path.
//!
//! At each lambda the absolute coefficients are split into a "relevant" set
//! (magnitudes above a boundary) and an "irrelevant" set. The boundary moves
//! along the path: at each step it starts at the largest magnitude of the
//! previously irrelevant variables and may be relocated once when the gap
//! structure of the sorted magnitudes indicates the split landed inside a
//! cluster. The final selection is the union of the relevant sets across the
//! whole path.
//!
//! All decisions are comparisons between order statistics of the magnitudes
//! and are therefore invariant to rescaling the magnitudes and to permuting
//! the variables.

use crate::error::{Result, SpspError};
use crate::path::AbsolutePathRow;

/// Default ratio threshold used when the data-driven estimate is degenerate.
pub const FALLBACK_R_DEFAULT: f64 = 5.0;

/// Sorted magnitudes with consecutive gaps.
///
/// `order[i]` is the original index of the `i`-th smallest magnitude (ties
/// broken by original index), `sorted[i]` the magnitude itself, and
/// `gaps[i] = sorted[i] - sorted[i-1]` with an implicit leading zero
/// (`gaps[0] = sorted[0]`). The gaps always sum to the largest magnitude.
#[derive(Debug, Clone)]
pub struct AdjacentDistances {
    pub order: Vec<usize>,
    pub sorted: Vec<f64>,
    pub gaps: Vec<f64>,
}

/// Sorts magnitudes ascending (stable in the original index) and forms the
/// consecutive gaps, anchored at zero below the smallest value.
pub fn adjacent_distances(b: &[f64]) -> AdjacentDistances {
    let p = b.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| b[i].partial_cmp(&b[j]).unwrap().then(i.cmp(&j)));
    let sorted: Vec<f64> = order.iter().map(|&i| b[i]).collect();
    let mut gaps = Vec::with_capacity(p);
    let mut prev = 0.0;
    for &v in &sorted {
        gaps.push(v - prev);
        prev = v;
    }
    AdjacentDistances { order, sorted, gaps }
}

/// Largest gap over `gaps[..m]` with its position; ties resolved toward the
/// largest position. Returns `None` when the range is empty.
fn max_gap(gaps: &[f64], m: usize) -> Option<(f64, usize)> {
    if m == 0 {
        return None;
    }
    let mut best = gaps[0];
    let mut at = 0usize;
    for (i, &g) in gaps.iter().enumerate().take(m).skip(1) {
        if g >= best {
            best = g;
            at = i;
        }
    }
    Some((best, at))
}

/// Data-driven ratio threshold from the magnitudes at the smallest lambda:
/// the largest gap divided by the largest gap below it. `None` when either
/// quantity is not positive (degenerate profile).
pub fn try_estimate_r(b: &[f64]) -> Option<f64> {
    let d = adjacent_distances(b);
    let (dmax, at) = max_gap(&d.gaps, d.gaps.len())?;
    if dmax <= 0.0 || at == 0 {
        return None;
    }
    let dmax2 = d.gaps[..at].iter().cloned().fold(f64::MIN, f64::max);
    if dmax2 <= 0.0 {
        return None;
    }
    Some(dmax / dmax2)
}

/// [`try_estimate_r`] with an explicit fallback for the degenerate case.
pub fn estimate_r(b: &[f64], fallback: f64) -> f64 {
    try_estimate_r(b).unwrap_or(fallback)
}

/// The boundary and the induced split at one lambda.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionState {
    /// Magnitudes strictly above this value are relevant.
    pub threshold: f64,
    /// Relevant variables, ascending original indices.
    pub relevant: Vec<usize>,
    /// Irrelevant variables, ascending original indices.
    pub irrelevant: Vec<usize>,
}

impl PartitionState {
    /// The state before the first step: nothing relevant, infinite boundary.
    pub fn initial(p: usize) -> Self {
        PartitionState {
            threshold: f64::INFINITY,
            relevant: Vec::new(),
            irrelevant: (0..p).collect(),
        }
    }

    fn split(b: &[f64], threshold: f64) -> Self {
        let mut relevant = Vec::new();
        let mut irrelevant = Vec::new();
        for (j, &v) in b.iter().enumerate() {
            if v > threshold {
                relevant.push(j);
            } else {
                irrelevant.push(j);
            }
        }
        PartitionState {
            threshold,
            relevant,
            irrelevant,
        }
    }
}

/// Advances the partition by one lambda.
///
/// The boundary starts at the largest current magnitude among the previously
/// irrelevant variables (zero if none remain). If the gap separating the two
/// sets is no more than `r` times the largest within-irrelevant gap *and*
/// that largest gap dominates every gap below it by more than a factor of
/// `r`, the boundary is relocated to just below the dominant gap. The
/// relocation is applied at most once.
pub fn partition_step(prev: &PartitionState, b: &[f64], r: f64) -> PartitionState {
    let p = b.len();
    let t0 = prev
        .irrelevant
        .iter()
        .map(|&j| b[j])
        .fold(0.0f64, f64::max);
    let mut state = PartitionState::split(b, t0);

    let d = adjacent_distances(b);
    let s = state.relevant.len();
    let m = p - s; // size of the irrelevant set
    let between = if s == 0 { 0.0 } else { d.gaps[m] };
    if let Some((dmax, at)) = max_gap(&d.gaps, m) {
        let dmax2 = if at == 0 {
            0.0
        } else {
            d.gaps[..at].iter().cloned().fold(f64::MIN, f64::max)
        };
        if between <= r * dmax && dmax > r * dmax2 {
            // the dominant break sits inside the irrelevant set; move the
            // boundary to the magnitude just below it
            let t_new = if at == 0 { 0.0 } else { d.sorted[at - 1] };
            state = PartitionState::split(b, t_new);
        }
    }
    state
}

/// How the ratio threshold used by [`spsp_partition`] was determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RSource {
    Estimated,
    Fallback,
    Override,
}

impl RSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            RSource::Estimated => "estimated",
            RSource::Fallback => "fallback",
            RSource::Override => "override",
        }
    }
}

/// Controls for [`spsp_partition`].
#[derive(Debug, Clone)]
pub struct PartitionOptions {
    /// Fixed ratio threshold; when `None` it is estimated from the path.
    pub r: Option<f64>,
    /// Used when the data-driven estimate is degenerate.
    pub fallback_r: f64,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        PartitionOptions {
            r: None,
            fallback_r: FALLBACK_R_DEFAULT,
        }
    }
}

/// Output of the path partition.
#[derive(Debug, Clone)]
pub struct PartitionResult {
    /// Boundary per lambda (ascending grid); the first entry is infinite.
    pub boundary: Vec<f64>,
    /// Relevant set per lambda, ascending indices; the first entry is empty.
    pub relevant_sets: Vec<Vec<usize>>,
    /// Union of the relevant sets, ascending indices.
    pub selected: Vec<usize>,
    /// Ratio threshold actually used.
    pub r_used: f64,
    /// Where `r_used` came from.
    pub r_source: RSource,
}

/// Partitions a full path of absolute magnitudes (rows ascending in lambda).
///
/// The first row (smallest lambda, the densest fit) determines the ratio
/// threshold unless one is supplied; partitioning then walks the remaining
/// rows in order and accumulates the union of relevant sets.
pub fn spsp_partition(
    rows: &[AbsolutePathRow],
    opts: &PartitionOptions,
) -> Result<PartitionResult> {
    if rows.len() < 2 {
        return Err(SpspError::EmptyPath(rows.len()));
    }
    let p = rows[0].values.len();
    if p == 0 {
        return Err(SpspError::DimensionMismatch("path has zero variables".into()));
    }
    for row in rows {
        if row.values.len() != p {
            return Err(SpspError::DimensionMismatch(format!(
                "path rows disagree on variable count ({} vs {p})",
                row.values.len()
            )));
        }
        if row.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SpspError::NonFinite("path magnitudes".into()));
        }
    }
    if let Some(r) = opts.r {
        if !r.is_finite() || r <= 0.0 {
            return Err(SpspError::BadOverride(format!(
                "ratio threshold must be positive and finite, got {r}"
            )));
        }
    }
    if !opts.fallback_r.is_finite() || opts.fallback_r <= 0.0 {
        return Err(SpspError::BadOverride(format!(
            "fallback ratio threshold must be positive and finite, got {}",
            opts.fallback_r
        )));
    }

    let (r_used, r_source) = match opts.r {
        Some(r) => (r, RSource::Override),
        None => match try_estimate_r(&rows[0].values) {
            Some(r) => (r, RSource::Estimated),
            None => (opts.fallback_r, RSource::Fallback),
        },
    };

    let mut state = PartitionState::initial(p);
    let mut boundary = Vec::with_capacity(rows.len());
    let mut relevant_sets = Vec::with_capacity(rows.len());
    let mut selected_mask = vec![false; p];
    boundary.push(state.threshold);
    relevant_sets.push(Vec::new());

    for row in &rows[1..] {
        state = partition_step(&state, &row.values, r_used);
        boundary.push(state.threshold);
        for &j in &state.relevant {
            selected_mask[j] = true;
        }
        relevant_sets.push(state.relevant.clone());
    }

    let selected = selected_mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(j, _)| j)
        .collect();

    Ok(PartitionResult {
        boundary,
        relevant_sets,
        selected,
        r_used,
        r_source,
    })
}
