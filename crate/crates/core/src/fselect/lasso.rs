//! LASSO ranking by order of entry into the active set along a geometric
//! regularization path, solved by cyclic coordinate descent on the linear
//! model with +-1 response coding.

use super::{Algorithm, RankedFeatures};
use crate::dsp;
use crate::error::{Error, Result};

const N_LAMBDAS: usize = 100;
const LAMBDA_MIN_RATIO: f64 = 1e-3;
const MAX_SWEEPS: usize = 10_000;
/// Convergence when max_j (delta beta_j)^2 < TOL_SQ. Highly collinear
/// column pairs (the measure set contains exact linear twins) make a
/// tighter coefficient tolerance zigzag indefinitely without changing the
/// active set.
const TOL_SQ: f64 = 1e-9;

fn zscore(col: &[f64]) -> Vec<f64> {
    let m = dsp::mean(col);
    let s = dsp::std_pop(col);
    if s <= 0.0 {
        vec![0.0; col.len()]
    } else {
        col.iter().map(|&v| (v - m) / s).collect()
    }
}

fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

/// Rank features by their entry order on the LASSO path; never-active
/// features are appended in descending |correlation with y| with score 0.
pub fn lasso_rank(columns: &[Vec<f64>], y: &[u8], k: usize) -> Result<RankedFeatures> {
    let m = columns.len();
    if k == 0 || k > m {
        return Err(Error::Bounds(format!("k = {k} outside 1..={m}")));
    }
    let n = y.len() as f64;
    let x: Vec<Vec<f64>> = columns.iter().map(|c| zscore(c)).collect();
    // +-1 coding, centered (an implicit unpenalized intercept).
    let raw: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
    let ym = dsp::mean(&raw);
    let yc: Vec<f64> = raw.iter().map(|&v| v - ym).collect();

    let corr: Vec<f64> = x
        .iter()
        .map(|c| c.iter().zip(&yc).map(|(a, b)| a * b).sum::<f64>() / n)
        .collect();
    let lambda_max = corr.iter().fold(0.0f64, |acc, &c| acc.max(c.abs()));
    if lambda_max <= 0.0 {
        // Target orthogonal to every feature: empty path, correlation order.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            corr[b]
                .abs()
                .partial_cmp(&corr[a].abs())
                .unwrap()
                .then(a.cmp(&b))
        });
        order.truncate(k);
        return Ok(RankedFeatures {
            scores: vec![0.0; order.len()],
            order,
            algorithm: Algorithm::Lasso,
        });
    }

    let mut beta = vec![0.0f64; m];
    let mut residual = yc.clone();
    let mut entry_lambda: Vec<Option<f64>> = vec![None; m];

    for step in 0..N_LAMBDAS {
        let lambda = lambda_max * LAMBDA_MIN_RATIO.powf(step as f64 / (N_LAMBDAS - 1) as f64);
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut max_delta_sq = 0.0f64;
            for j in 0..m {
                let xj = &x[j];
                // rho = (1/n) x_j . (r + x_j beta_j); unit variance columns.
                let dot: f64 = xj.iter().zip(&residual).map(|(a, b)| a * b).sum();
                let rho = dot / n + beta[j];
                let new = soft_threshold(rho, lambda);
                let delta = new - beta[j];
                if delta != 0.0 {
                    for (r, &v) in residual.iter_mut().zip(xj) {
                        *r -= delta * v;
                    }
                    beta[j] = new;
                    max_delta_sq = max_delta_sq.max(delta * delta);
                }
            }
            if max_delta_sq < TOL_SQ {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence { lambda });
        }
        for j in 0..m {
            if entry_lambda[j].is_none() && beta[j] != 0.0 {
                entry_lambda[j] = Some(lambda);
            }
        }
    }

    // Entered features by descending entry lambda (path order); ties by
    // lowest index. Never-active features follow by |correlation|.
    let mut entered: Vec<usize> = (0..m).filter(|&j| entry_lambda[j].is_some()).collect();
    entered.sort_by(|&a, &b| {
        entry_lambda[b]
            .unwrap()
            .partial_cmp(&entry_lambda[a].unwrap())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut never: Vec<usize> = (0..m).filter(|&j| entry_lambda[j].is_none()).collect();
    never.sort_by(|&a, &b| {
        corr[b]
            .abs()
            .partial_cmp(&corr[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut order = entered;
    let mut scores: Vec<f64> = order.iter().map(|&j| entry_lambda[j].unwrap()).collect();
    for j in never {
        order.push(j);
        scores.push(0.0);
    }
    order.truncate(k);
    scores.truncate(k);
    Ok(RankedFeatures {
        order,
        scores,
        algorithm: Algorithm::Lasso,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Orthonormal design: entry order is analytically the descending
    /// |X' y| / n order (soft thresholding is exact per coordinate).
    #[test]
    fn orthonormal_design_matches_analytic_order() {
        // Build an orthogonal design from shifted square waves on 64 rows.
        let n = 64;
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for j in 0..6 {
            let period = 2usize << j;
            cols.push(
                (0..n)
                    .map(|i| if (i / (period / 2)) % 2 == 0 { 1.0 } else { -1.0 })
                    .collect(),
            );
        }
        // Verify orthogonality of the construction.
        for a in 0..cols.len() {
            for b in a + 1..cols.len() {
                let dot: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
                assert!(dot.abs() < 1e-9, "columns {a},{b} not orthogonal");
            }
        }
        // Target: a weighted mix with known coefficient magnitudes.
        let weights = [0.9, 0.1, 0.5, 0.0, 0.7, 0.3];
        let yf: Vec<f64> = (0..n)
            .map(|i| {
                let mix: f64 = cols.iter().zip(&weights).map(|(c, w)| w * c[i]).sum();
                mix
            })
            .collect();
        let y: Vec<u8> = yf.iter().map(|&v| if v > 0.0 { 1 } else { 0 }).collect();
        // The analytic order uses the same standardized correlations the
        // solver sees.
        let x: Vec<Vec<f64>> = cols.iter().map(|c| zscore(c)).collect();
        let raw: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
        let ym = crate::dsp::mean(&raw);
        let yc: Vec<f64> = raw.iter().map(|&v| v - ym).collect();
        let mut analytic: Vec<usize> = (0..cols.len()).collect();
        let corr: Vec<f64> = x
            .iter()
            .map(|c| c.iter().zip(&yc).map(|(a, b)| a * b).sum::<f64>().abs())
            .collect();
        analytic.sort_by(|&a, &b| corr[b].partial_cmp(&corr[a]).unwrap().then(a.cmp(&b)));

        let r = lasso_rank(&cols, &y, cols.len()).unwrap();
        assert_eq!(r.order, analytic);
    }

    #[test]
    fn single_informative_feature_dominates_path() {
        let mut rng = crate::rng::rng_from_seed(6);
        let n = 200;
        let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let strong: Vec<f64> = y
            .iter()
            .map(|&v| 2.0 * v as f64 - 1.0 + 0.1 * crate::rng::normal(&mut rng))
            .collect();
        let mut cols: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..n).map(|_| crate::rng::normal(&mut rng)).collect())
            .collect();
        cols.insert(0, strong);
        let r = lasso_rank(&cols, &y, 6).unwrap();
        assert_eq!(r.order[0], 0);
        // The strong feature enters far earlier than anything else.
        assert!(r.scores[0] > 4.0 * r.scores[1].max(1e-12));
    }

    #[test]
    fn orthogonal_target_falls_back_to_correlation_order() {
        // y alternates while features are constant-in-class pairs summing to
        // zero correlation.
        let n = 100;
        let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|j| (0..n).map(|i| ((i / 2 + j) % 2) as f64).collect())
            .collect();
        let r = lasso_rank(&cols, &y, 4).unwrap();
        assert_eq!(r.order.len(), 4);
        assert!(r.scores.iter().all(|&s| s == 0.0));
    }
}
