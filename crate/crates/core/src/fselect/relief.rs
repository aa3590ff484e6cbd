//! RELIEF feature weighting: every instance contributes the difference
//! between its distance to the nearest miss and to the nearest hit, feature
//! by feature, on [0, 1]-scaled columns. All instances are used with one
//! nearest hit/miss each.

use super::{Algorithm, RankedFeatures};
use crate::error::{Error, Result};

/// Scale each column to [0, 1]; constant columns map to all zeros.
fn unit_scale(columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    columns
        .iter()
        .map(|c| {
            let max = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let range = max - min;
            if range <= 0.0 {
                vec![0.0; c.len()]
            } else {
                c.iter().map(|&v| (v - min) / range).collect()
            }
        })
        .collect()
}

/// Raw RELIEF weights (summed over instances, not normalized).
pub fn relief_weights(columns: &[Vec<f64>], y: &[u8]) -> Result<Vec<f64>> {
    let m = columns.len();
    let n = y.len();
    for class in [0u8, 1u8] {
        if y.iter().filter(|&&v| v == class).count() < 2 {
            return Err(Error::InsufficientClass(format!(
                "class {class} needs at least 2 instances"
            )));
        }
    }
    let scaled = unit_scale(columns);
    // Row-major copy for cache-friendly distance scans.
    let mut rows = vec![0.0f64; n * m];
    for (j, col) in scaled.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            rows[i * m + j] = v;
        }
    }
    let dist_sq = |a: usize, b: usize| -> f64 {
        let (ra, rb) = (&rows[a * m..(a + 1) * m], &rows[b * m..(b + 1) * m]);
        ra.iter().zip(rb).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    let mut weights = vec![0.0f64; m];
    for i in 0..n {
        let mut hit = usize::MAX;
        let mut hit_d = f64::INFINITY;
        let mut miss = usize::MAX;
        let mut miss_d = f64::INFINITY;
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = dist_sq(i, j);
            if y[j] == y[i] {
                if d < hit_d {
                    hit_d = d;
                    hit = j;
                }
            } else if d < miss_d {
                miss_d = d;
                miss = j;
            }
        }
        let (ri, rh, rm) = (
            &rows[i * m..(i + 1) * m],
            &rows[hit * m..(hit + 1) * m],
            &rows[miss * m..(miss + 1) * m],
        );
        for f in 0..m {
            weights[f] += (ri[f] - rm[f]).abs() - (ri[f] - rh[f]).abs();
        }
    }
    Ok(weights)
}

pub fn relief_rank(columns: &[Vec<f64>], y: &[u8], k: usize) -> Result<RankedFeatures> {
    let m = columns.len();
    if k == 0 || k > m {
        return Err(Error::Bounds(format!("k = {k} outside 1..={m}")));
    }
    let weights = relief_weights(columns, y)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        weights[b]
            .partial_cmp(&weights[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    order.truncate(k);
    let scores = order.iter().map(|&j| weights[j]).collect();
    Ok(RankedFeatures {
        order,
        scores,
        algorithm: Algorithm::Relief,
    })
}
