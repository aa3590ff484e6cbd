//! End-to-end orchestration used by the CLI: dataset extraction and the
//! select -> sweep -> evaluate -> summarize pipeline, with all output-file
//! formats in one place.

use std::path::Path;

use rayon::prelude::*;

use crate::audio::{gate_recording, load_wav, resample, trim_phonation, MetaRow, TrimConfig};
use crate::config::{CohortFilter, RunConfig};
use crate::error::{Error, Result};
use crate::eval::{
    cross_validate, feature_sweep, CvConfig, EvalReport, ModelKind, SweepRow,
};
use crate::features::{extract_features, FeatureConfig, FeatureMatrix, N_FEATURES};
use crate::fselect::{
    selection_protocol, Algorithm, ProtocolConfig, RankedFeatures, SelectionTally,
};

/// A gating or extraction rejection, logged by the extract command.
#[derive(Debug, Clone)]
pub struct Rejection {
    pub id: String,
    pub reason: String,
}

/// Load, resample to 8 kHz, trim, gate, and extract features for every
/// metadata row. Recordings are processed in parallel; the output rows are
/// ordered by recording id.
pub fn extract_dataset(
    rows: &[MetaRow],
    base_dir: &Path,
    cfg: &RunConfig,
) -> Result<(FeatureMatrix, Vec<Rejection>)> {
    let trim_cfg = TrimConfig::default();
    let feature_cfg = FeatureConfig {
        normative: cfg.normative(),
        ..Default::default()
    };
    let mut sorted: Vec<&MetaRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let results: Vec<(String, std::result::Result<crate::features::FeatureVector, String>, &MetaRow)> =
        sorted
            .par_iter()
            .map(|row| {
                let path = base_dir.join(&row.path);
                let outcome = (|| -> std::result::Result<crate::features::FeatureVector, String> {
                    let rec = load_wav(&path).map_err(|e| e.to_string())?;
                    let rec = resample(&rec, 8000);
                    let decision = gate_recording(&rec, cfg.min_duration, &trim_cfg);
                    if !decision.accepted {
                        return Err(decision.reason.unwrap_or_else(|| "gated".into()));
                    }
                    let mut trimmed = trim_phonation(&rec, &trim_cfg).map_err(|e| e.to_string())?;
                    trimmed.id = row.id.clone();
                    trimmed.label = row.label;
                    trimmed.age = row.age;
                    trimmed.sex = row.sex;
                    extract_features(&trimmed, &feature_cfg).map_err(|e| e.to_string())
                })();
                (row.id.clone(), outcome, *row)
            })
            .collect();

    let mut matrix = FeatureMatrix::default();
    let mut rejections = Vec::new();
    for (id, outcome, row) in results {
        match outcome {
            Ok(fv) => matrix.push_row(id, row.label, row.age, row.sex, &fv),
            Err(reason) => rejections.push(Rejection { id, reason }),
        }
    }
    Ok((matrix, rejections))
}

/// Restrict a matrix to one cohort by sex. Errors when the filter empties
/// the dataset.
pub fn filter_cohort(m: &FeatureMatrix, filter: CohortFilter) -> Result<FeatureMatrix> {
    let keep: Vec<usize> = (0..m.n_rows())
        .filter(|&i| match filter {
            CohortFilter::All => true,
            CohortFilter::Female => m.sexes[i] == crate::audio::Sex::F,
            CohortFilter::Male => m.sexes[i] == crate::audio::Sex::M,
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidInput(format!(
            "cohort filter {:?} leaves no recordings",
            filter.name()
        )));
    }
    let mut out = FeatureMatrix::default();
    for &i in &keep {
        let fv = crate::features::FeatureVector {
            values: m.row(i).to_vec(),
            flags: m.row(i).iter().map(|v| v.is_nan()).collect(),
        };
        out.push_row(m.ids[i].clone(), m.labels[i], m.ages[i], m.sexes[i], &fv);
    }
    Ok(out)
}

/// CSV rendering of one ranking: `rank,feature_index,feature_name,score,algorithm`.
pub fn ranking_csv(r: &RankedFeatures, config_hash: u64, seed: u64) -> String {
    let names = crate::features::feature_names();
    let mut out = format!("# config_hash={config_hash:016x} seed={seed}\n");
    out.push_str("rank,feature_index,feature_name,score,algorithm\n");
    for (pos, (&f, &s)) in r.order.iter().zip(&r.scores).enumerate() {
        let name = names.get(f).map(|n| n.as_str()).unwrap_or("");
        out.push_str(&format!("{},{f},{name},{s},{}\n", pos + 1, r.algorithm.name()));
    }
    out
}

/// Parse a ranking CSV back (feature order is what downstream needs).
pub fn read_ranking_csv(path: impl AsRef<Path>) -> Result<RankedFeatures> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut order = Vec::new();
    let mut scores = Vec::new();
    let mut algorithm = Algorithm::Ensemble;
    for line in text.lines().skip_while(|l| l.starts_with('#')).skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::InvalidInput(format!(
                "ranking line has {} fields",
                parts.len()
            )));
        }
        order.push(
            parts[1]
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad feature index {:?}", parts[1])))?,
        );
        scores.push(
            parts[3]
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad score {:?}", parts[3])))?,
        );
        algorithm = Algorithm::parse(parts[4])?;
    }
    let r = RankedFeatures {
        order,
        scores,
        algorithm,
    };
    r.check()?;
    Ok(r)
}

/// CSV rendering of a tally: `feature_index,feature_name,count_of_<iters>`.
pub fn tally_csv(t: &SelectionTally, config_hash: u64, seed: u64) -> String {
    let names = crate::features::feature_names();
    let mut out = format!("# config_hash={config_hash:016x} seed={seed}\n");
    out.push_str(&format!("feature_index,feature_name,count_of_{}\n", t.iterations));
    for (f, &c) in t.counts.iter().enumerate() {
        let name = names.get(f).map(|n| n.as_str()).unwrap_or("");
        out.push_str(&format!("{f},{name},{c}\n"));
    }
    out
}

/// CSV rendering of sweep rows.
pub fn sweep_csv(rows: &[SweepRow], config_hash: u64, seed: u64) -> String {
    let mut out = format!("# config_hash={config_hash:016x} seed={seed}\n");
    out.push_str(
        "algorithm,n_features,sens_mean,sens_sd,spec_mean,spec_sd,acc_mean,acc_sd,bal_mean,bal_sd\n",
    );
    for r in rows {
        let a = &r.aggregate;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.algorithm,
            r.n_features,
            a.sensitivity.mean,
            a.sensitivity.sd,
            a.specificity.mean,
            a.specificity.sd,
            a.accuracy.mean,
            a.accuracy.sd,
            a.balanced_accuracy.mean,
            a.balanced_accuracy.sd,
        ));
    }
    out
}

/// Outcome of the full pipeline on one cohort.
pub struct CohortOutcome {
    pub cohort: CohortFilter,
    pub tallies: Vec<SelectionTally>,
    pub sweep: Vec<SweepRow>,
    /// (algorithm, best size, report) triples for the summary.
    pub best: Vec<(Algorithm, usize, EvalReport)>,
    pub nb_report: EvalReport,
    pub random_report: EvalReport,
}

/// Selection protocol + sweep + per-model evaluation for one cohort.
pub fn run_cohort(m: &FeatureMatrix, cfg: &RunConfig) -> Result<CohortOutcome> {
    let columns = m.columns();
    let y = m.binary_labels()?;
    let protocol = selection_protocol(
        &columns,
        &y,
        &ProtocolConfig {
            reps: cfg.reps,
            folds: cfg.folds,
            top_k: cfg.top_k,
            seed: cfg.seed,
        },
    )?;
    let rankings: Vec<RankedFeatures> =
        protocol.tallies.iter().map(|t| t.ranking()).collect();

    let sizes: Vec<usize> = cfg
        .sizes
        .iter()
        .copied()
        .filter(|&s| s <= N_FEATURES)
        .collect();
    let cv = CvConfig {
        reps: cfg.reps,
        folds: cfg.folds,
        seed: cfg.seed,
        grouping: cfg.grouping,
        model: ModelKind::Rf {
            n_trees: cfg.n_trees,
        },
    };
    let sweep = feature_sweep(&columns, &y, Some(&m.ids), &rankings, &sizes, &cv)?;

    // Best size per algorithm by mean balanced accuracy.
    let mut best = Vec::new();
    for ranking in &rankings {
        let rows: Vec<&SweepRow> = sweep
            .iter()
            .filter(|r| r.algorithm == ranking.algorithm.name())
            .collect();
        let best_row = rows
            .iter()
            .max_by(|a, b| {
                a.aggregate
                    .balanced_accuracy
                    .mean
                    .partial_cmp(&b.aggregate.balanced_accuracy.mean)
                    .unwrap()
                    .then(b.n_features.cmp(&a.n_features).reverse())
            })
            .ok_or_else(|| Error::InvalidInput("empty sweep".into()))?;
        let subset = &ranking.order[..best_row.n_features];
        let report = cross_validate(&columns, &y, Some(&m.ids), Some(subset), &cv)?;
        best.push((ranking.algorithm, best_row.n_features, report));
    }

    // Baselines: NB on the configured algorithm's best subset, and the coin.
    let (nb_alg, nb_size, _) = best
        .iter()
        .find(|(a, _, _)| *a == cfg.algorithm)
        .or_else(|| best.first())
        .map(|(a, s, r)| (*a, *s, r))
        .ok_or_else(|| Error::InvalidInput("no rankings".into()))?;
    let nb_subset: Vec<usize> = rankings
        .iter()
        .find(|r| r.algorithm == nb_alg)
        .unwrap()
        .order[..nb_size]
        .to_vec();
    let nb_report = cross_validate(
        &columns,
        &y,
        Some(&m.ids),
        Some(&nb_subset),
        &CvConfig {
            model: ModelKind::NaiveBayes,
            ..cv
        },
    )?;
    let random_report = cross_validate(
        &columns,
        &y,
        Some(&m.ids),
        None,
        &CvConfig {
            model: ModelKind::Random,
            ..cv
        },
    )?;

    Ok(CohortOutcome {
        cohort: cfg.cohort,
        tallies: protocol.tallies,
        sweep,
        best,
        nb_report,
        random_report,
    })
}

fn pct(v: f64) -> String {
    format!("{:.1}%", v * 100.0)
}

fn summary_line(label: &str, a: &crate::eval::AggregateMetrics) -> String {
    format!(
        "{label:<34} {:>6}+-{:<6} {:>6}+-{:<6} {:>6}+-{:<6} {:>6}+-{:<6}\n",
        pct(a.sensitivity.mean),
        pct(a.sensitivity.sd),
        pct(a.specificity.mean),
        pct(a.specificity.sd),
        pct(a.accuracy.mean),
        pct(a.accuracy.sd),
        pct(a.balanced_accuracy.mean),
        pct(a.balanced_accuracy.sd),
    )
}

/// Human-readable classification summary table for one cohort.
pub fn cohort_summary(outcome: &CohortOutcome) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} recordings\n{:<34} {:<14} {:<14} {:<14} {:<14}\n",
        outcome.cohort.name().to_ascii_uppercase(),
        "classifier + feature selection",
        "sensitivity",
        "specificity",
        "accuracy",
        "balanced acc."
    ));
    for (alg, size, report) in &outcome.best {
        let label = format!("RF-{} ({} features)", alg.name(), size);
        out.push_str(&summary_line(&label, &report.aggregate));
    }
    out.push_str(&summary_line("Naive Bayes", &outcome.nb_report.aggregate));
    out.push_str(&summary_line("Random classifier", &outcome.random_report.aggregate));
    out
}

/// Run the pipeline per the config: all-recordings cohort, plus female/male
/// sections when sex_split is set, writing every output file into `out_dir`.
pub fn run_pipeline(m: &FeatureMatrix, cfg: &RunConfig, out_dir: &Path) -> Result<String> {
    std::fs::create_dir_all(out_dir)?;
    let hash = cfg.hash();
    let mut cohorts = vec![cfg.cohort];
    if cfg.sex_split && cfg.cohort == CohortFilter::All {
        cohorts.push(CohortFilter::Female);
        cohorts.push(CohortFilter::Male);
    }

    let mut summary = String::new();
    for cohort in cohorts {
        let sub = filter_cohort(m, cohort)?;
        let outcome = run_cohort(
            &sub,
            &RunConfig {
                cohort,
                ..cfg.clone()
            },
        )?;
        let tag = cohort.name();
        for tally in &outcome.tallies {
            std::fs::write(
                out_dir.join(format!("tally_{tag}_{}.csv", tally.algorithm.name())),
                tally_csv(tally, hash, cfg.seed),
            )?;
            let ranking = tally.ranking();
            std::fs::write(
                out_dir.join(format!("ranking_{tag}_{}.csv", tally.algorithm.name())),
                ranking_csv(&ranking, hash, cfg.seed),
            )?;
        }
        std::fs::write(
            out_dir.join(format!("sweep_{tag}.csv")),
            sweep_csv(&outcome.sweep, hash, cfg.seed),
        )?;
        let report_bundle = serde_json::json!({
            "config_hash": format!("{hash:016x}"),
            "seed": cfg.seed,
            "cohort": tag,
            "best": outcome
                .best
                .iter()
                .map(|(alg, size, report)| {
                    serde_json::json!({
                        "algorithm": alg.name(),
                        "n_features": size,
                        "report": report,
                    })
                })
                .collect::<Vec<_>>(),
            "naive_bayes": outcome.nb_report,
            "random": outcome.random_report,
        });
        std::fs::write(
            out_dir.join(format!("report_{tag}.json")),
            serde_json::to_string_pretty(&report_bundle)
                .map_err(|e| Error::InvalidInput(e.to_string()))?,
        )?;
        summary.push_str(&cohort_summary(&outcome));
        summary.push('\n');
    }
    let summary_text = format!("# config_hash={hash:016x} seed={}\n{summary}", cfg.seed);
    std::fs::write(out_dir.join("summary.txt"), &summary_text)?;
    Ok(summary_text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{Label, Sex};

    /// A small synthetic feature matrix with a planted separable direction.
    fn toy_matrix(n: usize, m_features: usize, sep: f64, seed: u64) -> FeatureMatrix {
        let mut rng = crate::rng::rng_from_seed(seed);
        let mut out = FeatureMatrix::default();
        for i in 0..n {
            let label = if i % 2 == 0 { Label::Pd } else { Label::Hc };
            let c = if label == Label::Pd { sep } else { -sep };
            let mut values = vec![f64::NAN; N_FEATURES];
            for (j, v) in values.iter_mut().enumerate().take(m_features) {
                *v = if j < 3 {
                    c + crate::rng::normal(&mut rng)
                } else {
                    crate::rng::normal(&mut rng)
                };
            }
            for v in values.iter_mut().skip(m_features) {
                *v = 0.0;
            }
            let fv = crate::features::FeatureVector {
                flags: values.iter().map(|v| v.is_nan()).collect(),
                values,
            };
            out.push_row(
                format!("r{:04}_{}", i / 2, i % 2),
                label,
                Some(50 + (i % 30) as u32),
                if i % 4 < 2 { Sex::F } else { Sex::M },
                &fv,
            );
        }
        out
    }

    #[test]
    fn cohort_filter_works_and_errors_when_empty() {
        let m = toy_matrix(40, 5, 1.0, 1);
        let f = filter_cohort(&m, CohortFilter::Female).unwrap();
        assert!(f.n_rows() > 0);
        assert!(f.sexes.iter().all(|&s| s == Sex::F));
        let mut all_male = m.clone();
        all_male.sexes = vec![Sex::M; all_male.n_rows()];
        assert!(filter_cohort(&all_male, CohortFilter::Female).is_err());
    }

    #[test]
    fn ranking_csv_roundtrip() {
        let r = RankedFeatures {
            order: vec![5, 2, 9],
            scores: vec![0.9, 0.5, 0.1],
            algorithm: Algorithm::Relief,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ranking.csv");
        std::fs::write(&path, ranking_csv(&r, 0x1234, 7)).unwrap();
        let back = read_ranking_csv(&path).unwrap();
        assert_eq!(back.order, r.order);
        assert_eq!(back.algorithm, Algorithm::Relief);
    }

    #[test]
    fn pipeline_writes_all_outputs_and_is_reproducible() {
        let m = toy_matrix(60, 8, 2.0, 3);
        let cfg = RunConfig {
            seed: 5,
            reps: 2,
            folds: 3,
            sizes: vec![2, 4],
            top_k: 4,
            n_trees: 20,
            ..Default::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let summary1 = run_pipeline(&m, &cfg, dir.path()).unwrap();
        let bytes1: Vec<(String, Vec<u8>)> = {
            let mut files: Vec<_> = std::fs::read_dir(dir.path())
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            files
                .iter()
                .map(|p| {
                    (
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        std::fs::read(p).unwrap(),
                    )
                })
                .collect()
        };
        assert!(bytes1.iter().any(|(n, _)| n == "sweep_all.csv"));
        assert!(bytes1.iter().any(|(n, _)| n == "report_all.json"));
        assert!(bytes1.iter().any(|(n, _)| n == "ranking_all_ensemble.csv"));
        assert!(bytes1.iter().any(|(n, _)| n == "tally_all_mrmr.csv"));
        assert!(bytes1.iter().any(|(n, _)| n == "summary.txt"));

        // Byte-identical rerun.
        let dir2 = tempfile::tempdir().unwrap();
        let summary2 = run_pipeline(&m, &cfg, dir2.path()).unwrap();
        assert_eq!(summary1, summary2);
        for (name, content) in &bytes1 {
            let other = std::fs::read(dir2.path().join(name)).unwrap();
            assert_eq!(&other, content, "file {name} differs across reruns");
        }
    }
}
