//! Random Forest: bootstrap-sampled Gini trees grown to purity with sqrt(M)
//! candidate features per split, majority vote with a conservative HC tie
//! rule. NaN feature values are imputed with per-feature training medians
//! stored in the model.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::DecisionTree;
use crate::dsp;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate features per split; None = floor(sqrt(n_features)).
    pub mtry: Option<usize>,
    pub seed: u64,
    /// Test hook: disable bootstrap resampling.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 500,
            mtry: None,
            seed: 0,
            bootstrap: true,
        }
    }
}

/// A trained forest. Serializes to portable JSON (`format_version` guards
/// cross-version loads).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub n_trees: usize,
    pub mtry: usize,
    pub seed: u64,
    pub n_features: usize,
    /// Training-set per-feature medians used for NaN imputation.
    pub medians: Vec<f64>,
    pub trees: Vec<DecisionTree>,
}

/// Prediction with the PD vote fraction and the tie marker.
#[derive(Debug, Clone, Copy)]
pub struct Prediction {
    /// 0 = HC, 1 = PD.
    pub class: u8,
    /// Fraction of trees voting PD.
    pub probability: f64,
    /// True when the vote split exactly in half (decided HC).
    pub tie: bool,
}

/// Median of the finite values of a column; 0 when all values are NaN.
fn finite_median(col: &[f64]) -> f64 {
    let finite: Vec<f64> = col.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        0.0
    } else {
        dsp::median(&finite)
    }
}

pub fn rf_train(columns: &[Vec<f64>], y: &[u8], cfg: &ForestConfig) -> Result<ForestModel> {
    let m = columns.len();
    let n = y.len();
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("empty training data".into()));
    }
    if cfg.n_trees == 0 {
        return Err(Error::InvalidInput("n_trees must be at least 1".into()));
    }
    let classes: std::collections::HashSet<u8> = y.iter().copied().collect();
    if classes.len() < 2 {
        return Err(Error::DegenerateTraining);
    }
    let mtry = cfg.mtry.unwrap_or_else(|| (m as f64).sqrt().floor() as usize).clamp(1, m);

    let medians: Vec<f64> = columns.iter().map(|c| finite_median(c)).collect();
    let imputed: Vec<Vec<f64>> = columns
        .iter()
        .zip(&medians)
        .map(|(c, &med)| {
            c.iter()
                .map(|&v| if v.is_finite() { v } else { med })
                .collect()
        })
        .collect();

    let trees: Vec<DecisionTree> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, t as u64));
            let idx: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            DecisionTree::grow(&imputed, y, &idx, mtry, &mut rng)
        })
        .collect();

    Ok(ForestModel {
        format_version: 1,
        n_trees: cfg.n_trees,
        mtry,
        seed: cfg.seed,
        n_features: m,
        medians,
        trees,
    })
}

pub fn rf_predict(model: &ForestModel, x: &[f64]) -> Result<Prediction> {
    if x.len() != model.n_features {
        return Err(Error::InvalidInput(format!(
            "feature vector has {} values, model expects {}",
            x.len(),
            model.n_features
        )));
    }
    let row: Vec<f64> = x
        .iter()
        .zip(&model.medians)
        .map(|(&v, &med)| if v.is_finite() { v } else { med })
        .collect();
    let pd_votes: usize = model.trees.iter().map(|t| t.predict(&row) as usize).sum();
    let hc_votes = model.n_trees - pd_votes;
    let tie = pd_votes == hc_votes;
    Ok(Prediction {
        class: if pd_votes > hc_votes { 1 } else { 0 },
        probability: pd_votes as f64 / model.n_trees as f64,
        tie,
    })
}

impl ForestModel {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self)
            .map_err(|e| Error::InvalidInput(format!("model serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<ForestModel> {
        let model: ForestModel = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("model parse failed: {e}")))?;
        if model.format_version != 1 {
            return Err(Error::InvalidInput(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }
}
