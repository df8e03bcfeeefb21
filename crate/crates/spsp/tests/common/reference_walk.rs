//! Shared by the property and acceptance test targets: an independent
//! straight-line rewrite of the partition walk plus a tie-heavy random path
//! generator. Kept deliberately naive (full re-sorts, no incremental state,
//! no helpers shared with the library) so it can serve as an oracle.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use spsp::AbsolutePathRow;

/// With `repeat_relocation` the boundary-relocation test is re-applied until
/// the boundary stops moving instead of at most once per lambda.
pub fn reference_partition(
    rows: &[AbsolutePathRow],
    r_override: Option<f64>,
    fallback_r: f64,
    repeat_relocation: bool,
) -> (Vec<usize>, f64) {
    let p = rows[0].values.len();
    let sorted_and_gaps = |vals: &[f64]| {
        let mut s: Vec<f64> = vals.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut gaps = vec![0.0; s.len()];
        for i in 0..s.len() {
            gaps[i] = s[i] - if i == 0 { 0.0 } else { s[i - 1] };
        }
        (s, gaps)
    };
    // Last position attaining the maximum.
    let argmax = |g: &[f64]| {
        let mut at = 0usize;
        for i in 0..g.len() {
            if g[i] >= g[at] {
                at = i;
            }
        }
        at
    };

    // The ratio threshold comes from the densest fit (smallest lambda).
    let r = r_override.unwrap_or_else(|| {
        let (_, gaps) = sorted_and_gaps(&rows[0].values);
        let at = argmax(&gaps);
        let dmax = gaps[at];
        let dmax2 = gaps[..at].iter().cloned().fold(0.0f64, f64::max);
        if dmax > 0.0 && dmax2 > 0.0 {
            dmax / dmax2
        } else {
            fallback_r
        }
    });

    let mut prev_irrelevant: Vec<usize> = (0..p).collect();
    let mut union = vec![false; p];
    for row in &rows[1..] {
        let b = &row.values;
        let mut t = prev_irrelevant
            .iter()
            .map(|&j| b[j])
            .fold(0.0f64, f64::max);
        loop {
            let relevant: Vec<usize> = (0..p).filter(|&j| b[j] > t).collect();
            let irrelevant: Vec<f64> = (0..p).filter(|&j| b[j] <= t).map(|j| b[j]).collect();
            if irrelevant.is_empty() {
                break;
            }
            let (sorted_c, gaps_c) = sorted_and_gaps(&irrelevant);
            let division = if relevant.is_empty() {
                0.0
            } else {
                let top_c = sorted_c.last().cloned().unwrap_or(0.0);
                let min_rel = relevant.iter().map(|&j| b[j]).fold(f64::MAX, f64::min);
                min_rel - top_c
            };
            let at = argmax(&gaps_c);
            let dmax = gaps_c[at];
            let dmax2 = gaps_c[..at].iter().cloned().fold(0.0f64, f64::max);
            if dmax > 0.0 && division <= r * dmax && dmax > r * dmax2 {
                let t_new = if at == 0 { 0.0 } else { sorted_c[at - 1] };
                if t_new < t {
                    t = t_new;
                    if repeat_relocation {
                        continue;
                    }
                }
            }
            break;
        }
        for j in (0..p).filter(|&j| b[j] > t) {
            union[j] = true;
        }
        prev_irrelevant = (0..p).filter(|&j| b[j] <= t).collect();
    }
    ((0..p).filter(|&j| union[j]).collect(), r)
}

/// Magnitude paths with many exact ties and zeros: roughly half the entries
/// come from a coarse lattice so equal values and equal gaps are common.
pub fn random_rows(rng: &mut ChaCha8Rng, p: usize, k: usize) -> Vec<AbsolutePathRow> {
    (0..k)
        .map(|i| AbsolutePathRow {
            lambda: (i + 1) as f64,
            values: (0..p)
                .map(|_| {
                    if rng.random::<f64>() < 0.5 {
                        0.1 * rng.random_range(0..=6) as f64
                    } else {
                        2.0 * rng.random::<f64>()
                    }
                })
                .collect(),
        })
        .collect()
}
