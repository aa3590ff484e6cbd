//! Gram-Schmidt orthogonalization ranking: at each step the remaining
//! columns are projected onto the null space of the selected ones, and the
//! residual most correlated with the target is taken next.

use super::{Algorithm, RankedFeatures};
use crate::dsp;
use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-9;

fn zscore(col: &[f64]) -> Vec<f64> {
    let m = dsp::mean(col);
    let s = dsp::std_pop(col);
    if s <= 0.0 {
        vec![0.0; col.len()]
    } else {
        col.iter().map(|&v| (v - m) / s).collect()
    }
}

pub fn gso_rank(columns: &[Vec<f64>], y: &[u8], k: usize) -> Result<RankedFeatures> {
    let m = columns.len();
    if k == 0 || k > m {
        return Err(Error::Bounds(format!("k = {k} outside 1..={m}")));
    }
    let n = y.len();
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let y_norm = {
        let my = dsp::mean(&yf);
        let centered: Vec<f64> = yf.iter().map(|&v| v - my).collect();
        let nn = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nn <= 0.0 {
            return Err(Error::InsufficientClass("single-class target".into()));
        }
        centered.iter().map(|&v| v / nn).collect::<Vec<f64>>()
    };

    // Residuals start as z-scored columns.
    let mut residuals: Vec<Vec<f64>> = columns.iter().map(|c| zscore(c)).collect();
    let mut alive: Vec<bool> = residuals
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt() > RESIDUAL_TOL * (n as f64).sqrt())
        .collect();
    let mut skipped: Vec<usize> = (0..m).filter(|&j| !alive[j]).collect();

    let mut order = Vec::with_capacity(k);
    let mut scores = Vec::with_capacity(k);

    while order.len() < k {
        // Score = |correlation of residual with y|.
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            if !alive[j] {
                continue;
            }
            let r = &residuals[j];
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rn <= RESIDUAL_TOL * (n as f64).sqrt() {
                alive[j] = false;
                skipped.push(j);
                continue;
            }
            let dot: f64 = r.iter().zip(&y_norm).map(|(a, b)| a * b).sum();
            let score = (dot / rn).abs();
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((j, score)),
            }
        }
        let Some((sel, score)) = best else {
            break; // everything left is in the span of the selected set
        };
        order.push(sel);
        scores.push(score);
        alive[sel] = false;

        // Orthogonalize the survivors against the chosen residual.
        let u: Vec<f64> = {
            let r = &residuals[sel];
            let nn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            r.iter().map(|&v| v / nn).collect()
        };
        for j in 0..m {
            if !alive[j] {
                continue;
            }
            let dot: f64 = residuals[j].iter().zip(&u).map(|(a, b)| a * b).sum();
            for (rv, uv) in residuals[j].iter_mut().zip(&u) {
                *rv -= dot * uv;
            }
        }
    }

    // Zero-variance / fully explained columns close the ranking, flagged by
    // a zero score, lowest index first.
    skipped.sort_unstable();
    skipped.dedup();
    for j in skipped {
        if order.len() == k {
            break;
        }
        if !order.contains(&j) {
            order.push(j);
            scores.push(0.0);
        }
    }

    Ok(RankedFeatures {
        order,
        scores,
        algorithm: Algorithm::Gso,
    })
}
