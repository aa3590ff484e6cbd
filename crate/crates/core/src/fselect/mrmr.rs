//! Minimum-redundancy maximum-relevance ranking (greedy, MID criterion):
//! each step picks the feature maximizing I(x; y) minus its mean pairwise
//! mutual information with the already-selected set.

use super::mi::{equal_frequency_bins, label_entropy, mi_discrete, mi_feature_label, N_BINS};
use super::{Algorithm, RankedFeatures};
use crate::error::{Error, Result};

pub fn mrmr_rank(columns: &[Vec<f64>], y: &[u8], k: usize) -> Result<RankedFeatures> {
    let m = columns.len();
    if k == 0 || k > m {
        return Err(Error::Bounds(format!("k = {k} outside 1..={m}")));
    }
    if label_entropy(y) == 0.0 {
        return Err(Error::InsufficientClass("need two classes for mRMR".into()));
    }

    // Pre-bin every column once; pairwise MI is computed lazily.
    let bins: Vec<Vec<usize>> = columns
        .iter()
        .map(|c| equal_frequency_bins(c, N_BINS))
        .collect();
    let relevance: Vec<f64> = columns.iter().map(|c| mi_feature_label(c, y)).collect();

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut scores: Vec<f64> = Vec::with_capacity(k);
    let mut remaining: Vec<usize> = (0..m).collect();
    // redundancy_sum[j] accumulates MI(j, s) over selected s.
    let mut redundancy_sum = vec![0.0f64; m];

    // First pick: maximal relevance, ties to the lowest index.
    let first = remaining
        .iter()
        .copied()
        .max_by(|&a, &b| {
            relevance[a]
                .partial_cmp(&relevance[b])
                .unwrap()
                .then(b.cmp(&a))
        })
        .unwrap();
    selected.push(first);
    scores.push(relevance[first]);
    remaining.retain(|&j| j != first);

    while selected.len() < k {
        let last = *selected.last().unwrap();
        for &j in &remaining {
            redundancy_sum[j] += mi_discrete(&bins[last], &bins[j], N_BINS, N_BINS);
        }
        let n_sel = selected.len() as f64;
        let best = remaining
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let sa = relevance[a] - redundancy_sum[a] / n_sel;
                let sb = relevance[b] - redundancy_sum[b] / n_sel;
                sa.partial_cmp(&sb).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        selected.push(best);
        scores.push(relevance[best] - redundancy_sum[best] / n_sel);
        remaining.retain(|&j| j != best);
    }

    Ok(RankedFeatures {
        order: selected,
        scores,
        algorithm: Algorithm::Mrmr,
    })
}
