//! The validation harness: balanced, stratified 10-fold cross-validation
//! with repetitions, confusion metrics, and feature-count sweeps.

pub mod stats;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{nb_predict, nb_train, random_classifier, rf_predict, rf_train, ForestConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Balancing by majority-class undersampling (shared with the selection
/// protocol).
pub use crate::fselect::balance_indices;

pub use stats::{
    age_association, jackknife_correlations, ks_test, mann_whitney, normalized_mi, pearson,
    AgeAssociation, JackknifeRow,
};

/// Confusion counts with PD as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u32,
    pub fp: u32,
    pub tn: u32,
    pub fn_: u32,
}

impl ConfusionCounts {
    pub fn total(&self) -> u32 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Derived metrics, all in [0, 1].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Metrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
}

/// sensitivity = TP/(TP+FN), specificity = TN/(TN+FP),
/// accuracy = (TP+TN)/total, balanced accuracy = (sens + spec)/2.
pub fn metrics(c: &ConfusionCounts) -> Result<Metrics> {
    if c.tp + c.fn_ == 0 || c.tn + c.fp == 0 {
        return Err(Error::UndefinedMetric(
            "a class is absent from the test set".into(),
        ));
    }
    let sens = c.tp as f64 / (c.tp + c.fn_) as f64;
    let spec = c.tn as f64 / (c.tn + c.fp) as f64;
    let acc = (c.tp + c.tn) as f64 / c.total() as f64;
    Ok(Metrics {
        sensitivity: sens,
        specificity: spec,
        accuracy: acc,
        balanced_accuracy: (sens + spec) / 2.0,
    })
}

/// Classifier choice for the harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    Rf { n_trees: usize },
    NaiveBayes,
    Random,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Rf { .. } => "rf",
            ModelKind::NaiveBayes => "nb",
            ModelKind::Random => "random",
        }
    }
}

/// Fold-assignment granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grouping {
    /// Each recording lands in a fold independently (the literal protocol).
    Recording,
    /// All recordings of one participant share a fold.
    Participant,
}

impl Grouping {
    pub fn parse(s: &str) -> Result<Grouping> {
        match s {
            "recording" => Ok(Grouping::Recording),
            "participant" => Ok(Grouping::Participant),
            other => Err(Error::InvalidInput(format!("unknown grouping {other:?}"))),
        }
    }
}

/// Participant key of a recording id: everything before the last underscore
/// (ids like `pd_0017_1` map to `pd_0017`); ids without an underscore are
/// their own participant.
pub fn participant_key(id: &str) -> &str {
    match id.rfind('_') {
        Some(pos) => &id[..pos],
        None => id,
    }
}

/// One CV iteration's outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub rep: u32,
    pub fold: u32,
    pub counts: ConfusionCounts,
}

/// Mean +- sample SD of one metric over iterations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub sensitivity: MetricSummary,
    pub specificity: MetricSummary,
    pub accuracy: MetricSummary,
    pub balanced_accuracy: MetricSummary,
}

/// Full cross-validation report; serializes to the report JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: serde_json::Value,
    pub seed: u64,
    pub iterations: Vec<IterationRecord>,
    pub aggregate: AggregateMetrics,
}

fn summarize(values: &[f64]) -> MetricSummary {
    MetricSummary {
        mean: crate::dsp::mean(values),
        sd: crate::dsp::std_dev(values),
    }
}

/// Harness configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvConfig {
    pub reps: usize,
    pub folds: usize,
    pub seed: u64,
    pub grouping: Grouping,
    pub model: ModelKind,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            reps: 10,
            folds: 10,
            seed: 0,
            grouping: Grouping::Recording,
            model: ModelKind::Rf { n_trees: 500 },
        }
    }
}

/// Balanced, stratified, repeated k-fold cross-validation over the rows of
/// `columns` restricted to the feature indices in `subset` (None = all).
/// `ids` drive participant grouping; pass None for recording grouping.
pub fn cross_validate(
    columns: &[Vec<f64>],
    y: &[u8],
    ids: Option<&[String]>,
    subset: Option<&[usize]>,
    cfg: &CvConfig,
) -> Result<EvalReport> {
    if cfg.reps == 0 || cfg.folds < 2 {
        return Err(Error::InvalidInput("need reps >= 1 and folds >= 2".into()));
    }
    if cfg.grouping == Grouping::Participant && ids.is_none() {
        return Err(Error::InvalidInput(
            "participant grouping requires recording ids".into(),
        ));
    }
    // The subset is canonicalized by sorting: the model must depend on the
    // feature SET, not the ranking order it arrived in.
    let active: Vec<usize> = match subset {
        Some(s) => {
            for &j in s {
                if j >= columns.len() {
                    return Err(Error::Bounds(format!("feature {j} out of range")));
                }
            }
            let mut v = s.to_vec();
            v.sort_unstable();
            v.dedup();
            if v.len() != s.len() {
                return Err(Error::InvalidInput("duplicate features in subset".into()));
            }
            v
        }
        None => (0..columns.len()).collect(),
    };
    let sub_columns: Vec<Vec<f64>> = active.iter().map(|&j| columns[j].clone()).collect();

    // Plan every iteration sequentially (determinism), run them in parallel.
    struct Iter {
        rep: u32,
        fold: u32,
        train: Vec<usize>,
        test: Vec<usize>,
        pred_seed: u64,
    }
    let mut plan: Vec<Iter> = Vec::with_capacity(cfg.reps * cfg.folds);
    for rep in 0..cfg.reps {
        let rep_seed = derive_seed(cfg.seed, rep as u64);
        let mut rng = rng_from_seed(rep_seed);
        // Permute, then balance.
        let balanced = balance_indices(y, &mut rng);
        // Assign folds stratified by class; participant grouping keeps all
        // of a participant's rows together.
        let mut fold_of: Vec<usize> = vec![0; balanced.len()];
        match cfg.grouping {
            Grouping::Recording => {
                for class in [0u8, 1u8] {
                    let mut members: Vec<usize> = (0..balanced.len())
                        .filter(|&i| y[balanced[i]] == class)
                        .collect();
                    members.shuffle(&mut rng);
                    for (pos, &i) in members.iter().enumerate() {
                        fold_of[i] = pos % cfg.folds;
                    }
                }
            }
            Grouping::Participant => {
                let ids = ids.unwrap();
                use std::collections::BTreeMap;
                let mut groups: BTreeMap<(u8, &str), Vec<usize>> = BTreeMap::new();
                for (i, &row) in balanced.iter().enumerate() {
                    groups
                        .entry((y[row], participant_key(&ids[row])))
                        .or_default()
                        .push(i);
                }
                for class in [0u8, 1u8] {
                    let mut class_groups: Vec<&Vec<usize>> = groups
                        .iter()
                        .filter(|((c, _), _)| *c == class)
                        .map(|(_, v)| v)
                        .collect();
                    class_groups.shuffle(&mut rng);
                    for (pos, g) in class_groups.iter().enumerate() {
                        for &i in g.iter() {
                            fold_of[i] = pos % cfg.folds;
                        }
                    }
                }
            }
        }
        for fold in 0..cfg.folds {
            let train: Vec<usize> = (0..balanced.len())
                .filter(|&i| fold_of[i] != fold)
                .map(|i| balanced[i])
                .collect();
            let test: Vec<usize> = (0..balanced.len())
                .filter(|&i| fold_of[i] == fold)
                .map(|i| balanced[i])
                .collect();
            plan.push(Iter {
                rep: rep as u32,
                fold: fold as u32,
                train,
                test,
                pred_seed: derive_seed(rep_seed, 1_000 + fold as u64),
            });
        }
    }

    let results: Vec<Result<IterationRecord>> = plan
        .par_iter()
        .map(|it| {
            let test_y: Vec<u8> = it.test.iter().map(|&r| y[r]).collect();
            if !test_y.contains(&0) || !test_y.contains(&1) {
                return Err(Error::UndefinedMetric(format!(
                    "rep {} fold {}: single-class test fold",
                    it.rep, it.fold
                )));
            }
            let predictions: Vec<u8> = match cfg.model {
                ModelKind::Random => random_classifier(it.test.len(), it.pred_seed),
                ModelKind::Rf { n_trees } => {
                    let train_cols: Vec<Vec<f64>> = sub_columns
                        .iter()
                        .map(|c| it.train.iter().map(|&r| c[r]).collect())
                        .collect();
                    let train_y: Vec<u8> = it.train.iter().map(|&r| y[r]).collect();
                    let model = rf_train(
                        &train_cols,
                        &train_y,
                        &ForestConfig {
                            n_trees,
                            seed: it.pred_seed,
                            ..Default::default()
                        },
                    )?;
                    it.test
                        .iter()
                        .map(|&r| {
                            let row: Vec<f64> =
                                sub_columns.iter().map(|c| c[r]).collect();
                            rf_predict(&model, &row).map(|p| p.class)
                        })
                        .collect::<Result<Vec<u8>>>()?
                }
                ModelKind::NaiveBayes => {
                    let train_cols: Vec<Vec<f64>> = sub_columns
                        .iter()
                        .map(|c| it.train.iter().map(|&r| c[r]).collect())
                        .collect();
                    let train_y: Vec<u8> = it.train.iter().map(|&r| y[r]).collect();
                    let model = nb_train(&train_cols, &train_y)?;
                    it.test
                        .iter()
                        .map(|&r| {
                            let row: Vec<f64> =
                                sub_columns.iter().map(|c| c[r]).collect();
                            nb_predict(&model, &row)
                        })
                        .collect::<Result<Vec<u8>>>()?
                }
            };
            let mut c = ConfusionCounts {
                tp: 0,
                fp: 0,
                tn: 0,
                fn_: 0,
            };
            for (&truth, &pred) in test_y.iter().zip(&predictions) {
                match (truth, pred) {
                    (1, 1) => c.tp += 1,
                    (1, 0) => c.fn_ += 1,
                    (0, 0) => c.tn += 1,
                    (0, 1) => c.fp += 1,
                    _ => unreachable!(),
                }
            }
            Ok(IterationRecord {
                rep: it.rep,
                fold: it.fold,
                counts: c,
            })
        })
        .collect();

    let mut iterations = Vec::with_capacity(results.len());
    for r in results {
        iterations.push(r?);
    }
    let per_metric: Vec<Metrics> = iterations
        .iter()
        .map(|it| metrics(&it.counts))
        .collect::<Result<_>>()?;
    let aggregate = AggregateMetrics {
        sensitivity: summarize(&per_metric.iter().map(|m| m.sensitivity).collect::<Vec<_>>()),
        specificity: summarize(&per_metric.iter().map(|m| m.specificity).collect::<Vec<_>>()),
        accuracy: summarize(&per_metric.iter().map(|m| m.accuracy).collect::<Vec<_>>()),
        balanced_accuracy: summarize(
            &per_metric.iter().map(|m| m.balanced_accuracy).collect::<Vec<_>>(),
        ),
    };
    Ok(EvalReport {
        config: serde_json::json!({
            "reps": cfg.reps,
            "folds": cfg.folds,
            "grouping": cfg.grouping,
            "model": cfg.model,
            "n_features": active.len(),
        }),
        seed: cfg.seed,
        iterations,
        aggregate,
    })
}

/// One row of the sweep output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: String,
    pub n_features: usize,
    pub aggregate: AggregateMetrics,
}

/// Run the harness at each subset size for each ranking.
pub fn feature_sweep(
    columns: &[Vec<f64>],
    y: &[u8],
    ids: Option<&[String]>,
    rankings: &[crate::fselect::RankedFeatures],
    sizes: &[usize],
    cfg: &CvConfig,
) -> Result<Vec<SweepRow>> {
    let m = columns.len();
    for &s in sizes {
        if s == 0 || s > m {
            return Err(Error::Bounds(format!("sweep size {s} outside 1..={m}")));
        }
    }
    let mut out = Vec::with_capacity(rankings.len() * sizes.len());
    for ranking in rankings {
        for &size in sizes {
            if size > ranking.order.len() {
                return Err(Error::Bounds(format!(
                    "size {size} exceeds ranking length {}",
                    ranking.order.len()
                )));
            }
            let subset = &ranking.order[..size];
            let report = cross_validate(columns, y, ids, Some(subset), cfg)?;
            out.push(SweepRow {
                algorithm: ranking.algorithm.name().to_string(),
                n_features: size,
                aggregate: report.aggregate,
            });
        }
    }
    Ok(out)
}

/// The ten subset sizes of the published sweep.
pub const DEFAULT_SWEEP_SIZES: [usize; 10] = [5, 10, 25, 50, 75, 100, 150, 200, 250, 307];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_hand_arithmetic() {
        let m = metrics(&ConfusionCounts {
            tp: 60,
            fn_: 40,
            tn: 70,
            fp: 30,
        })
        .unwrap();
        assert!((m.sensitivity - 0.60).abs() < 1e-12);
        assert!((m.specificity - 0.70).abs() < 1e-12);
        assert!((m.accuracy - 0.65).abs() < 1e-12);
        assert!((m.balanced_accuracy - 0.65).abs() < 1e-12);
    }

    #[test]
    fn metrics_published_row() {
        // Published operating point: sensitivity 64.90%, specificity 67.96%
        // gives balanced accuracy 66.43% -> 66.4 to one decimal.
        let bal: f64 = (64.90 + 67.96) / 2.0;
        assert!((bal - 66.43).abs() < 1e-9);
        assert_eq!(format!("{:.1}", bal), "66.4");
        // From the rounded published inputs the mean is 66.45, which still
        // matches the published 66.4 within half a unit in the last place.
        let bal_rounded: f64 = (64.9 + 68.0) / 2.0;
        assert!((bal_rounded - 66.4).abs() <= 0.05 + 1e-12);
    }

    #[test]
    fn metrics_symmetric_quarter() {
        let m = metrics(&ConfusionCounts {
            tp: 25,
            fn_: 25,
            tn: 25,
            fp: 25,
        })
        .unwrap();
        assert_eq!(m.sensitivity, 0.5);
        assert_eq!(m.specificity, 0.5);
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.balanced_accuracy, 0.5);
    }

    #[test]
    fn metrics_undefined_on_empty_class() {
        assert!(matches!(
            metrics(&ConfusionCounts {
                tp: 0,
                fn_: 0,
                tn: 10,
                fp: 5
            }),
            Err(Error::UndefinedMetric(_))
        ));
    }

    fn blobs(n: usize, sep: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>, Vec<String>) {
        let mut rng = rng_from_seed(seed);
        let mut cols = vec![Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut y = Vec::with_capacity(n);
        let mut ids = Vec::with_capacity(n);
        for i in 0..n {
            let class = (i % 2) as u8;
            let c = if class == 1 { sep } else { -sep };
            cols[0].push(c + crate::rng::normal(&mut rng));
            cols[1].push(c + crate::rng::normal(&mut rng));
            y.push(class);
            // Two recordings per participant.
            ids.push(format!("p{:03}_{}", i / 2, i % 2));
        }
        (cols, y, ids)
    }

    #[test]
    fn separable_data_high_accuracy() {
        let (cols, y, _) = blobs(200, 2.5, 1);
        let report = cross_validate(
            &cols,
            &y,
            None,
            None,
            &CvConfig {
                reps: 2,
                folds: 5,
                seed: 3,
                model: ModelKind::Rf { n_trees: 60 },
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.iterations.len(), 10);
        assert!(
            report.aggregate.balanced_accuracy.mean >= 0.95,
            "balanced accuracy {}",
            report.aggregate.balanced_accuracy.mean
        );
    }

    #[test]
    fn random_model_is_chance_level() {
        let (cols, y, _) = blobs(200, 2.5, 2);
        let report = cross_validate(
            &cols,
            &y,
            None,
            None,
            &CvConfig {
                model: ModelKind::Random,
                seed: 8,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.iterations.len(), 100);
        let bal = report.aggregate.balanced_accuracy.mean;
        assert!((bal - 0.5).abs() <= 0.03, "random balanced accuracy {bal}");
    }

    #[test]
    fn folds_partition_balanced_rows() {
        let (cols, y, ids) = blobs(120, 1.0, 4);
        // Instrument via the report: per rep, test folds must tile the
        // balanced set exactly once - total test rows per rep equals the
        // balanced size.
        let report = cross_validate(
            &cols,
            &y,
            Some(&ids),
            None,
            &CvConfig {
                reps: 3,
                folds: 4,
                seed: 5,
                model: ModelKind::Random,
                ..Default::default()
            },
        )
        .unwrap();
        for rep in 0..3u32 {
            let total: u32 = report
                .iterations
                .iter()
                .filter(|it| it.rep == rep)
                .map(|it| it.counts.total())
                .sum();
            assert_eq!(total, 120, "rep {rep} does not partition the rows");
        }
    }

    #[test]
    fn participant_grouping_no_leakage() {
        // Rebuild the assignment logic's observable effect: with exactly two
        // recordings per participant and participant grouping, sibling
        // recordings must share a fold. We detect leakage by constructing a
        // feature that memorizes the participant: if siblings were split
        // across train/test, a 1-NN-like forest would score far above chance
        // on an otherwise label-random problem.
        let n = 200;
        let mut rng = rng_from_seed(11);
        let mut ids = Vec::with_capacity(n);
        let mut memorize = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let participant = i / 2;
            ids.push(format!("q{participant:03}_{}", i % 2));
            // Same feature value for both takes of a participant.
            memorize.push(participant as f64 + 0.001 * crate::rng::normal(&mut rng));
            // Label depends only on the participant (coin per participant).
            y.push(if derive_seed(42, participant as u64) % 2 == 0 { 1u8 } else { 0u8 });
        }
        let cols = vec![memorize];
        let leaky = cross_validate(
            &cols,
            &y,
            Some(&ids),
            None,
            &CvConfig {
                reps: 3,
                folds: 5,
                seed: 6,
                model: ModelKind::Rf { n_trees: 40 },
                grouping: Grouping::Recording,
            },
        )
        .unwrap();
        let grouped = cross_validate(
            &cols,
            &y,
            Some(&ids),
            None,
            &CvConfig {
                reps: 3,
                folds: 5,
                seed: 6,
                model: ModelKind::Rf { n_trees: 40 },
                grouping: Grouping::Participant,
            },
        )
        .unwrap();
        let leak_acc = leaky.aggregate.balanced_accuracy.mean;
        let clean_acc = grouped.aggregate.balanced_accuracy.mean;
        assert!(
            leak_acc > 0.8,
            "memorization feature should leak under recording grouping ({leak_acc})"
        );
        assert!(
            clean_acc < 0.65,
            "participant grouping must block the leak ({clean_acc})"
        );
    }

    #[test]
    fn reports_reproducible() {
        let (cols, y, ids) = blobs(100, 1.5, 7);
        let cfg = CvConfig {
            reps: 2,
            folds: 5,
            seed: 17,
            model: ModelKind::Rf { n_trees: 30 },
            ..Default::default()
        };
        let a = cross_validate(&cols, &y, Some(&ids), None, &cfg).unwrap();
        let b = cross_validate(&cols, &y, Some(&ids), None, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn sweep_shapes_and_bounds() {
        let (cols, y, _) = blobs(80, 2.0, 9);
        let ranking = crate::fselect::RankedFeatures {
            order: vec![0, 1],
            scores: vec![1.0, 0.5],
            algorithm: crate::fselect::Algorithm::Gso,
        };
        let cfg = CvConfig {
            reps: 1,
            folds: 4,
            seed: 2,
            model: ModelKind::Random,
            ..Default::default()
        };
        let rows = feature_sweep(&cols, &y, None, &[ranking.clone()], &[1, 2], &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].n_features, 1);
        assert!(feature_sweep(&cols, &y, None, &[ranking], &[3], &cfg).is_err());
    }

    #[test]
    fn planted_signal_small_subset_keeps_accuracy() {
        // Informative features planted in the top ranks: a 10-feature subset
        // gives up at most 5 points of balanced accuracy against the full
        // set.
        let n = 200;
        let m = 40;
        let planted = [0usize, 1, 2, 3, 4];
        let mut rg = rng_from_seed(21);
        let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                let w = if planted.contains(&j) { 1.2 } else { 0.0 };
                y.iter()
                    .map(|&v| w * v as f64 + crate::rng::normal(&mut rg))
                    .collect()
            })
            .collect();
        let ranking = crate::fselect::gso_rank(&cols, &y, m).unwrap();
        let cfg = CvConfig {
            reps: 2,
            folds: 5,
            seed: 4,
            model: ModelKind::Rf { n_trees: 80 },
            ..Default::default()
        };
        let rows = feature_sweep(&cols, &y, None, &[ranking], &[10, m], &cfg).unwrap();
        let small = rows[0].aggregate.balanced_accuracy.mean;
        let full = rows[1].aggregate.balanced_accuracy.mean;
        assert!(
            small >= full - 0.05,
            "size 10 gave {small:.3}, full set {full:.3}"
        );
    }

    #[test]
    fn full_size_ranking_independent() {
        // At size = M the feature set is identical regardless of ranking.
        let (cols, y, _) = blobs(80, 2.0, 10);
        let mk = |order: Vec<usize>, alg| crate::fselect::RankedFeatures {
            scores: vec![0.0; order.len()],
            order,
            algorithm: alg,
        };
        let r1 = mk(vec![0, 1], crate::fselect::Algorithm::Mrmr);
        let r2 = mk(vec![1, 0], crate::fselect::Algorithm::Lasso);
        let cfg = CvConfig {
            reps: 1,
            folds: 4,
            seed: 3,
            model: ModelKind::Rf { n_trees: 20 },
            ..Default::default()
        };
        let rows = feature_sweep(&cols, &y, None, &[r1, r2], &[2], &cfg).unwrap();
        assert!(
            (rows[0].aggregate.balanced_accuracy.mean - rows[1].aggregate.balanced_accuracy.mean)
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn participant_key_extraction() {
        assert_eq!(participant_key("pd_0017_1"), "pd_0017");
        assert_eq!(participant_key("solo"), "solo");
        assert_eq!(participant_key("a_b"), "a");
    }
}
