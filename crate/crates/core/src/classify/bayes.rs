//! Gaussian Naive Bayes baseline with variance smoothing and median NaN
//! imputation, decided by maximum a-posteriori in log space.

use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};

const VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub format_version: u32,
    pub n_features: usize,
    pub priors: [f64; 2],
    /// Per-class per-feature means and variances, [class][feature].
    pub means: [Vec<f64>; 2],
    pub vars: [Vec<f64>; 2],
    pub medians: Vec<f64>,
}

pub fn nb_train(columns: &[Vec<f64>], y: &[u8]) -> Result<NaiveBayesModel> {
    let m = columns.len();
    let n = y.len();
    let n1 = y.iter().filter(|&&v| v == 1).count();
    let n0 = n - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::DegenerateTraining);
    }
    let medians: Vec<f64> = columns
        .iter()
        .map(|c| {
            let finite: Vec<f64> = c.iter().copied().filter(|v| v.is_finite()).collect();
            if finite.is_empty() {
                0.0
            } else {
                dsp::median(&finite)
            }
        })
        .collect();

    let mut means = [vec![0.0; m], vec![0.0; m]];
    let mut vars = [vec![0.0; m], vec![0.0; m]];
    for (j, col) in columns.iter().enumerate() {
        for class in 0..2usize {
            let vals: Vec<f64> = col
                .iter()
                .zip(y)
                .filter(|(_, &l)| l as usize == class)
                .map(|(&v, _)| if v.is_finite() { v } else { medians[j] })
                .collect();
            let mu = dsp::mean(&vals);
            let var = vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / vals.len() as f64;
            means[class][j] = mu;
            vars[class][j] = var.max(VAR_FLOOR);
        }
    }
    Ok(NaiveBayesModel {
        format_version: 1,
        n_features: m,
        priors: [n0 as f64 / n as f64, n1 as f64 / n as f64],
        means,
        vars,
        medians,
    })
}

pub fn nb_predict(model: &NaiveBayesModel, x: &[f64]) -> Result<u8> {
    if x.len() != model.n_features {
        return Err(Error::InvalidInput(format!(
            "feature vector has {} values, model expects {}",
            x.len(),
            model.n_features
        )));
    }
    let mut log_post = [model.priors[0].ln(), model.priors[1].ln()];
    for (j, &raw) in x.iter().enumerate() {
        let v = if raw.is_finite() { raw } else { model.medians[j] };
        for class in 0..2usize {
            let var = model.vars[class][j];
            let d = v - model.means[class][j];
            log_post[class] += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (2.0 * var);
        }
    }
    // MAP; exact ties go to HC.
    Ok(if log_post[1] > log_post[0] { 1 } else { 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, rng_from_seed};

    fn gaussians(n: usize, mu: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = rng_from_seed(seed);
        let mut col = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let class = (i % 2) as u8;
            let c = if class == 1 { mu } else { -mu };
            col.push(c + normal(&mut rng));
            y.push(class);
        }
        (vec![col], y)
    }

    #[test]
    fn boundary_at_zero_for_symmetric_gaussians() {
        // Unit-variance classes at +-3 with equal priors: the analytic Bayes
        // boundary is x = 0.
        let (cols, y) = gaussians(2000, 3.0, 1);
        let model = nb_train(&cols, &y).unwrap();
        // Scan for the empirical decision boundary.
        let mut boundary = f64::NAN;
        let mut prev = nb_predict(&model, &[-1.0]).unwrap();
        let mut x = -1.0;
        while x < 1.0 {
            let c = nb_predict(&model, &[x]).unwrap();
            if c != prev {
                boundary = x;
                break;
            }
            prev = c;
            x += 0.001;
        }
        assert!(boundary.abs() < 0.1, "boundary at {boundary}");

        // Fresh draws classify correctly.
        let (test, ty) = gaussians(2000, 3.0, 77);
        let correct = (0..ty.len())
            .filter(|&i| nb_predict(&model, &[test[0][i]]).unwrap() == ty[i])
            .count();
        assert!(correct as f64 / ty.len() as f64 >= 0.99, "acc {correct}/2000");
    }

    #[test]
    fn prior_ratio_decides_equal_likelihoods() {
        // Identical class-conditionals, skewed priors: every point goes to
        // the majority class.
        let col = vec![0.0, 0.0, 0.0, 0.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1];
        let y = vec![1, 1, 0, 0, 0, 0, 0, 0, 0, 0];
        let mut model = nb_train(&vec![col], &y).unwrap();
        model.means = [vec![0.0], vec![0.0]];
        model.vars = [vec![1.0], vec![1.0]];
        assert_eq!(nb_predict(&model, &[0.42]).unwrap(), 0);
    }

    #[test]
    fn zero_variance_smoothed() {
        let cols = vec![vec![1.0, 1.0, 2.0, 2.0]];
        let y = vec![0, 0, 1, 1];
        let model = nb_train(&cols, &y).unwrap();
        assert!(model.vars[0][0] >= VAR_FLOOR);
        assert_eq!(nb_predict(&model, &[1.0]).unwrap(), 0);
        assert_eq!(nb_predict(&model, &[2.0]).unwrap(), 1);
    }

    #[test]
    fn likelihood_scale_invariance() {
        // Adding a constant to every log-likelihood (multiplying likelihoods
        // by a positive constant) cannot change the decision; verify by
        // shifting both class log-densities via a variance rescale of a
        // feature that is identical across classes.
        let (mut cols, y) = gaussians(400, 2.0, 5);
        cols.push(vec![1.0; 400]); // uninformative constant feature
        let model = nb_train(&cols, &y).unwrap();
        let with = nb_predict(&model, &[1.5, 1.0]).unwrap();
        let reduced = nb_train(&cols[..1].to_vec(), &y).unwrap();
        let without = nb_predict(&reduced, &[1.5]).unwrap();
        assert_eq!(with, without);
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(
            nb_train(&vec![vec![1.0, 2.0]], &[0, 0]),
            Err(Error::DegenerateTraining)
        ));
    }
}
