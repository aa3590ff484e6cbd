//! Exploratory statistics: Pearson correlation, normalized mutual
//! information, jack-knife balanced correlations, Mann-Whitney U,
//! Kolmogorov-Smirnov, and feature-age association.

use crate::dsp;
use crate::error::{Error, Result};
use crate::fselect::mi::{label_entropy, mi_feature_label};
use crate::fselect::balance_indices;
use crate::rng::{derive_seed, rng_from_seed};

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput("pearson needs two equal-length samples".into()));
    }
    let mx = dsp::mean(x);
    let my = dsp::mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Mutual information between a continuous feature and binary labels,
/// normalized by the label entropy so it lies in [0, 1].
pub fn normalized_mi(x: &[f64], y: &[u8]) -> Result<f64> {
    let h = label_entropy(y);
    if h <= 0.0 {
        return Err(Error::UndefinedMetric("single-class labels in normalized MI".into()));
    }
    Ok((mi_feature_label(x, y) / h).clamp(0.0, 1.0))
}

/// One feature's jack-knife correlation summary.
#[derive(Debug, Clone)]
pub struct JackknifeRow {
    pub feature: usize,
    pub mean_r: f64,
    pub sd_r: f64,
}

/// Balanced jack-knife correlations: repeatedly undersample the majority
/// class, compute the Pearson correlation of each feature with the 0/1
/// response, and summarize as mean +- sd over repetitions, sorted by |mean|.
/// Zero-variance features are excluded and reported separately.
pub fn jackknife_correlations(
    columns: &[Vec<f64>],
    y: &[u8],
    reps: usize,
    seed: u64,
) -> Result<(Vec<JackknifeRow>, Vec<usize>)> {
    let m = columns.len();
    let mut sums = vec![0.0f64; m];
    let mut sq_sums = vec![0.0f64; m];
    let mut defined = vec![true; m];
    for rep in 0..reps {
        let mut rng = rng_from_seed(derive_seed(seed, rep as u64));
        let idx = balance_indices(y, &mut rng);
        let yb: Vec<f64> = idx.iter().map(|&i| y[i] as f64).collect();
        for (j, col) in columns.iter().enumerate() {
            if !defined[j] {
                continue;
            }
            let xb: Vec<f64> = idx.iter().map(|&i| col[i]).collect();
            match pearson(&xb, &yb) {
                Ok(r) => {
                    sums[j] += r;
                    sq_sums[j] += r * r;
                }
                Err(Error::UndefinedCorrelation) => defined[j] = false,
                Err(e) => return Err(e),
            }
        }
    }
    let n = reps as f64;
    let mut rows: Vec<JackknifeRow> = (0..m)
        .filter(|&j| defined[j])
        .map(|j| {
            let mean = sums[j] / n;
            let var = (sq_sums[j] / n - mean * mean).max(0.0);
            JackknifeRow {
                feature: j,
                mean_r: mean,
                sd_r: (var * n / (n - 1.0).max(1.0)).sqrt(),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.mean_r
            .abs()
            .partial_cmp(&a.mean_r.abs())
            .unwrap()
            .then(a.feature.cmp(&b.feature))
    });
    let excluded: Vec<usize> = (0..m).filter(|&j| !defined[j]).collect();
    Ok((rows, excluded))
}

/// Standard normal CDF (Abramowitz & Stegun 7.1.26 erf approximation).
fn phi(z: f64) -> f64 {
    let x = z / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.327_591_1 * x.abs());
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    let erf = 1.0 - poly * (-x * x).exp();
    let erf = if x >= 0.0 { erf } else { -erf };
    0.5 * (1.0 + erf)
}

/// Mann-Whitney U (wins of the first sample) with a tie-corrected normal
/// approximation for the two-sided p-value.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("mann-whitney on empty sample".into()));
    }
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    let n = n1 + n2;
    // Rank the pooled sample with average ranks for ties.
    let mut pooled: Vec<(f64, usize)> = a
        .iter()
        .map(|&v| (v, 0usize))
        .chain(b.iter().map(|&v| (v, 1usize)))
        .collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut ranks = vec![0.0f64; pooled.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for r in ranks.iter_mut().take(j + 1).skip(i) {
            *r = avg_rank;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let r1: f64 = pooled
        .iter()
        .zip(&ranks)
        .filter(|((_, src), _)| *src == 0)
        .map(|(_, &r)| r)
        .sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;

    let mean_u = n1 * n2 / 2.0;
    let var_u = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p = if var_u <= 0.0 {
        1.0
    } else {
        // Continuity-corrected two-sided normal approximation.
        let z = (u1 - mean_u).abs() - 0.5;
        2.0 * (1.0 - phi(z.max(0.0) / var_u.sqrt()))
    };
    Ok((u1, p.clamp(0.0, 1.0)))
}

/// Two-sample Kolmogorov-Smirnov: D = sup |ECDF difference| with the
/// asymptotic two-sided p-value.
pub fn ks_test(x1: &[f64], x2: &[f64]) -> Result<(f64, f64)> {
    if x1.is_empty() || x2.is_empty() {
        return Err(Error::InvalidInput("ks test on empty sample".into()));
    }
    let mut a = x1.to_vec();
    let mut b = x2.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n1, n2) = (a.len(), b.len());
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < n1 && j < n2 {
        let v = a[i].min(b[j]);
        while i < n1 && a[i] <= v {
            i += 1;
        }
        while j < n2 && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let p = if lambda < 0.2 {
        1.0
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let term = 2.0 * (-1.0f64).powi(k - 1) * (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
            sum += term;
            if term.abs() < 1e-12 {
                break;
            }
        }
        sum.clamp(0.0, 1.0)
    };
    Ok((d, p))
}

/// Association of one feature with age on HC rows with known age.
#[derive(Debug, Clone)]
pub struct AgeAssociation {
    pub feature: usize,
    pub r: f64,
    pub n_used: usize,
    pub n_dropped: usize,
    /// (age, value) pairs for scatter export.
    pub scatter: Vec<(f64, f64)>,
}

/// Feature-age correlations restricted to HC rows; rows with missing age are
/// dropped and counted.
pub fn age_association(
    columns: &[Vec<f64>],
    labels: &[crate::audio::Label],
    ages: &[Option<u32>],
    features: &[usize],
) -> Result<Vec<AgeAssociation>> {
    let hc_rows: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == crate::audio::Label::Hc)
        .collect();
    if hc_rows.is_empty() {
        return Err(Error::InvalidInput("no HC rows for age association".into()));
    }
    let mut out = Vec::with_capacity(features.len());
    for &f in features {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        let mut dropped = 0usize;
        for &i in &hc_rows {
            match ages[i] {
                Some(a) if columns[f][i].is_finite() => pairs.push((a as f64, columns[f][i])),
                _ => dropped += 1,
            }
        }
        if pairs.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "feature {f}: only {} HC rows with age",
                pairs.len()
            )));
        }
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let r = pearson(&xs, &ys)?;
        out.push(AgeAssociation {
            feature: f,
            r,
            n_used: pairs.len(),
            n_dropped: dropped,
            scatter: pairs,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::Label;

    #[test]
    fn pearson_sign_and_identity() {
        let y: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let neg: Vec<f64> = y.iter().map(|&v| -v).collect();
        assert!((pearson(&y, &y).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&neg, &y).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_zero_variance_flagged() {
        let x = vec![1.0; 50];
        let y: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert!(matches!(pearson(&x, &y), Err(Error::UndefinedCorrelation)));
    }

    #[test]
    fn nmi_identity_and_independence() {
        let y: Vec<u8> = (0..10_000).map(|i| (i % 2) as u8).collect();
        let x: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        assert!((normalized_mi(&x, &y).unwrap() - 1.0).abs() < 1e-9);
        let mut rng = crate::rng::rng_from_seed(8);
        let z: Vec<f64> = (0..10_000).map(|_| crate::rng::normal(&mut rng)).collect();
        assert!(normalized_mi(&z, &y).unwrap() <= 0.01);
    }

    #[test]
    fn jackknife_finds_planted_feature() {
        let mut rng = crate::rng::rng_from_seed(11);
        let n = 300;
        let y: Vec<u8> = (0..n).map(|i| if i % 3 == 0 { 1 } else { 0 }).collect();
        let planted: Vec<f64> = y
            .iter()
            .map(|&v| v as f64 + 0.2 * crate::rng::normal(&mut rng))
            .collect();
        let noise: Vec<f64> = (0..n).map(|_| crate::rng::normal(&mut rng)).collect();
        let constant = vec![2.0; n];
        let (rows, excluded) =
            jackknife_correlations(&[noise, planted, constant], &y, 100, 5).unwrap();
        assert_eq!(rows[0].feature, 1, "planted feature on top");
        assert!(rows[0].mean_r > 0.5, "positive sign, got {}", rows[0].mean_r);
        assert_eq!(excluded, vec![2], "constant feature excluded");
        // Exactly 100 repetitions recorded: sd is finite and plausible.
        assert!(rows[0].sd_r >= 0.0 && rows[0].sd_r < 0.2);
    }

    #[test]
    fn mann_whitney_disjoint_and_identical() {
        let (u, _p) = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(u, 0.0);
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let (_u, p) = mann_whitney(&x, &x).unwrap();
        assert!(p > 0.9, "identical samples p {p}");
    }

    #[test]
    fn mann_whitney_separated_significant() {
        let mut rng = crate::rng::rng_from_seed(4);
        let a: Vec<f64> = (0..60).map(|_| crate::rng::normal(&mut rng)).collect();
        let b: Vec<f64> = (0..60).map(|_| 2.0 + crate::rng::normal(&mut rng)).collect();
        let (_u, p) = mann_whitney(&a, &b).unwrap();
        assert!(p < 0.001, "p {p}");
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let (d, p) = ks_test(&x, &x).unwrap();
        assert_eq!(d, 0.0);
        assert!(p > 0.99);
        let y: Vec<f64> = (0..50).map(|i| 1000.0 + i as f64).collect();
        let (d, p) = ks_test(&x, &y).unwrap();
        assert_eq!(d, 1.0);
        assert!(p < 1e-6);
    }

    #[test]
    fn age_association_detects_trend() {
        let mut rng = crate::rng::rng_from_seed(6);
        let n = 500;
        let ages: Vec<Option<u32>> = (0..n).map(|i| Some(30 + (i % 50) as u32)).collect();
        let labels = vec![Label::Hc; n];
        let trend: Vec<f64> = ages
            .iter()
            .map(|a| 0.01 * a.unwrap() as f64 + 0.05 * crate::rng::normal(&mut rng))
            .collect();
        let flat: Vec<f64> = (0..n).map(|_| crate::rng::normal(&mut rng)).collect();
        let out = age_association(&[trend, flat], &labels, &ages, &[0, 1]).unwrap();
        assert!(out[0].r > 0.5, "trend r {}", out[0].r);
        assert!(out[1].r.abs() <= 0.1, "flat r {}", out[1].r);
        assert_eq!(out[0].n_used, n);
    }

    #[test]
    fn age_association_empty_hc_errors() {
        let labels = vec![Label::Pd; 10];
        let ages = vec![Some(60); 10];
        let col = vec![vec![0.0; 10]];
        assert!(age_association(&col, &labels, &ages, &[0]).is_err());
    }
}
