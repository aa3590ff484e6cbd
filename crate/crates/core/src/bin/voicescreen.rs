//! Command-line interface for the voice screening pipeline.
//!
//! Logs go to stderr; data goes to files. Exit codes: 0 success, 1 usage
//! error, 2 data error, 3 numerical/convergence error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use voicescreen::audio::{load_wav, read_metadata_csv, save_wav, Label};
use voicescreen::classify::{nb_train, rf_predict, rf_train, ForestConfig, ForestModel};
use voicescreen::config::{CohortFilter, RunConfig};
use voicescreen::error::{Error, Result};
use voicescreen::eval::{
    cross_validate, jackknife_correlations, mann_whitney, normalized_mi, CvConfig, Grouping,
    ModelKind,
};
use voicescreen::features::{feature_names, FeatureMatrix};
use voicescreen::fselect::Algorithm;
use voicescreen::pipeline::{
    extract_dataset, filter_cohort, ranking_csv, read_ranking_csv, run_pipeline, sweep_csv,
    tally_csv,
};
use voicescreen::pitch::{estimate_f0, PitchConfig};
use voicescreen::synth::{synthesize, synthesize_cohort, CohortSpec, SynthSpec};

#[derive(Parser)]
#[command(name = "voicescreen", version, about = "Telephone-quality voice screening pipeline")]
struct Cli {
    /// Worker threads (default: all cores). Results are thread-count
    /// independent.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Flat key = value config file applied before flag overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonRun {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// recording | participant
    #[arg(long, default_value = "recording")]
    grouping: String,
    /// all | female | male
    #[arg(long, default_value = "all")]
    cohort: String,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one phonation WAV.
    Synth {
        #[arg(long, default_value_t = 120.0)]
        f0: f64,
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[arg(long, default_value_t = 0.0)]
        shimmer: f64,
        #[arg(long, default_value_t = 25.0)]
        hnr: f64,
        #[arg(long, default_value_t = 0.0)]
        drift: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output WAV path.
        #[arg(long)]
        out: PathBuf,
        /// Append an `id,path,label,age,sex` row to this metadata CSV.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Synthesize a labeled two-cohort dataset (WAVs + metadata CSV).
    SynthCohort {
        /// Recordings per cohort.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// PD-like spec: comma list of key=value (f0, duration, jitter,
        /// shimmer, hnr, drift).
        #[arg(long, default_value = "jitter=2,hnr=10")]
        pd_spec: String,
        /// HC-like spec.
        #[arg(long, default_value = "jitter=0.5,hnr=25")]
        hc_spec: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Extract the feature matrix from WAVs listed in a metadata CSV.
    Extract {
        /// Directory that metadata paths are relative to.
        #[arg(long)]
        input_dir: PathBuf,
        #[arg(long)]
        metadata: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        min_duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit the per-frame F0 contour of one WAV as CSV.
    Pitch {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 70.0)]
        f0_min: f64,
        #[arg(long, default_value_t = 400.0)]
        f0_max: f64,
    },
    /// Exploratory statistics of a feature matrix.
    Stats {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also export feature-vs-age scatters for the top correlated
        /// features (HC rows only).
        #[arg(long, default_value_t = 0)]
        age_top: usize,
    },
    /// Run the balance/split/select protocol; write rankings and tallies.
    Select {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        top_k: usize,
        #[command(flatten)]
        run: CommonRun,
    },
    /// Train a model on a feature matrix.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// rf | nb
        #[arg(long, default_value = "rf")]
        model_type: String,
        #[arg(long, default_value_t = 500)]
        trees: usize,
        /// Optional ranking CSV restricting the model to its top features.
        #[arg(long)]
        ranking: Option<PathBuf>,
        #[arg(long)]
        n_features: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Predict labels for a feature matrix with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated evaluation; writes a report JSON.
    Eval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// rf | nb | random
        #[arg(long, default_value = "rf")]
        model: String,
        #[arg(long, default_value_t = 500)]
        trees: usize,
        #[arg(long)]
        ranking: Option<PathBuf>,
        #[arg(long)]
        n_features: Option<usize>,
        #[command(flatten)]
        run: CommonRun,
    },
    /// Feature-count sweep over the rankings in a directory.
    Sweep {
        #[arg(long)]
        features: PathBuf,
        /// Directory holding ranking_*.csv files from `select`.
        #[arg(long)]
        rankings_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated subset sizes.
        #[arg(long, default_value = "5,10,25,50,75,100,150,200,250,307")]
        sizes: String,
        #[arg(long, default_value_t = 500)]
        trees: usize,
        #[command(flatten)]
        run: CommonRun,
    },
    /// Full pipeline: select, sweep, evaluate, summarize.
    Pipeline {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also produce female/male sections.
        #[arg(long, default_value_t = false)]
        sex_split: bool,
        #[arg(long, default_value = "5,10,25,50,75,100,150,200,250,307")]
        sizes: String,
        #[arg(long, default_value_t = 500)]
        trees: usize,
        #[arg(long, default_value_t = 100)]
        top_k: usize,
        #[command(flatten)]
        run: CommonRun,
    },
}

fn parse_spec_list(s: &str, seed: u64) -> Result<SynthSpec> {
    let mut spec = SynthSpec {
        seed,
        ..Default::default()
    };
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("bad spec entry {part:?}")))?;
        let val: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad spec value {v:?}")))?;
        match k.trim() {
            "f0" => spec.f0 = val,
            "duration" => spec.duration = val,
            "jitter" => spec.jitter_pct = val,
            "shimmer" => spec.shimmer_pct = val,
            "hnr" => spec.hnr_db = val,
            "drift" => spec.f0_drift = val,
            other => return Err(Error::Config(format!("unknown spec key {other:?}"))),
        }
    }
    Ok(spec)
}

fn load_features(path: &Path) -> Result<FeatureMatrix> {
    FeatureMatrix::read_csv(path)
}

fn subset_from(ranking: &Option<PathBuf>, n_features: Option<usize>) -> Result<Option<Vec<usize>>> {
    match ranking {
        None => Ok(None),
        Some(path) => {
            let r = read_ranking_csv(path)?;
            let n = n_features.unwrap_or(r.order.len()).min(r.order.len());
            Ok(Some(r.order[..n].to_vec()))
        }
    }
}

fn make_cv(run: &CommonRun, model: ModelKind) -> Result<CvConfig> {
    Ok(CvConfig {
        reps: run.reps,
        folds: run.folds,
        seed: run.seed,
        grouping: Grouping::parse(&run.grouping)?,
        model,
    })
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let mut file_cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        file_cfg.apply_file(path)?;
    }

    match cli.command {
        Command::Synth {
            f0,
            duration,
            jitter,
            shimmer,
            hnr,
            drift,
            seed,
            out,
            meta,
        } => {
            let spec = SynthSpec {
                f0,
                duration,
                jitter_pct: jitter,
                shimmer_pct: shimmer,
                hnr_db: hnr,
                f0_drift: drift,
                seed,
                ..Default::default()
            };
            let rec = synthesize(&spec)?;
            save_wav(&rec, &out)?;
            if let Some(meta_path) = meta {
                let mut text = if meta_path.exists() {
                    std::fs::read_to_string(&meta_path)?
                } else {
                    "id,path,label,age,sex\n".to_string()
                };
                text.push_str(&format!("{},{},,,\n", rec.id, out.display()));
                std::fs::write(&meta_path, text)?;
            }
            eprintln!("wrote {} ({:.2} s)", out.display(), rec.duration());
        }
        Command::SynthCohort {
            n,
            pd_spec,
            hc_spec,
            seed,
            out_dir,
        } => {
            std::fs::create_dir_all(&out_dir)?;
            let pd = CohortSpec {
                base: parse_spec_list(&pd_spec, seed)?,
                f0_range: (100.0, 220.0),
            };
            let hc = CohortSpec {
                base: parse_spec_list(&hc_spec, seed)?,
                f0_range: (100.0, 220.0),
            };
            let mut meta = String::from("id,path,label,age,sex\n");
            for (prefix, label, cohort, seed_offset) in
                [("pd", Label::Pd, pd, 0u64), ("hc", Label::Hc, hc, 1u64)]
            {
                let recs = synthesize_cohort(
                    prefix,
                    label,
                    &cohort,
                    n,
                    seed.wrapping_add(seed_offset.wrapping_mul(0x9e37_79b9)),
                )?;
                for rec in recs {
                    let file = format!("{}.wav", rec.id);
                    save_wav(&rec, out_dir.join(&file))?;
                    let age = rec.age.map(|a| a.to_string()).unwrap_or_default();
                    meta.push_str(&format!(
                        "{},{},{},{},{}\n",
                        rec.id, file, rec.label, age, rec.sex
                    ));
                }
            }
            std::fs::write(out_dir.join("metadata.csv"), meta)?;
            eprintln!("wrote {} recordings to {}", 2 * n, out_dir.display());
        }
        Command::Extract {
            input_dir,
            metadata,
            out,
            min_duration,
            seed,
        } => {
            let mut cfg = file_cfg.clone();
            cfg.min_duration = min_duration;
            cfg.seed = seed;
            let rows = read_metadata_csv(&metadata)?;
            let (matrix, rejections) = extract_dataset(&rows, &input_dir, &cfg)?;
            for r in &rejections {
                eprintln!("rejected {}: {}", r.id, r.reason);
            }
            if matrix.n_rows() == 0 {
                return Err(Error::InvalidInput("no usable recordings".into()));
            }
            matrix.write_csv(&out, cfg.hash(), cfg.seed)?;
            eprintln!(
                "extracted {} rows ({} rejected) -> {}",
                matrix.n_rows(),
                rejections.len(),
                out.display()
            );
        }
        Command::Pitch {
            wav,
            out,
            f0_min,
            f0_max,
        } => {
            let rec = load_wav(&wav)?;
            let rec = voicescreen::audio::resample(&rec, 8000);
            let contour = estimate_f0(
                &rec,
                &PitchConfig {
                    f0_min,
                    f0_max,
                    ..Default::default()
                },
            )?;
            let mut text = String::from("time_s,f0_hz,strength\n");
            for i in 0..contour.times.len() {
                text.push_str(&format!(
                    "{},{},{}\n",
                    contour.times[i], contour.f0[i], contour.strength[i]
                ));
            }
            std::fs::write(&out, text)?;
            eprintln!(
                "wrote {} frames ({} voiced) -> {}",
                contour.times.len(),
                contour.n_voiced(),
                out.display()
            );
        }
        Command::Stats {
            features,
            out_dir,
            reps,
            seed,
            age_top,
        } => {
            std::fs::create_dir_all(&out_dir)?;
            let m = load_features(&features)?;
            let y = m.binary_labels()?;
            let columns = m.columns();
            let (rows, excluded) = jackknife_correlations(&columns, &y, reps, seed)?;
            let names = feature_names();
            let mut text = format!("# seed={seed} reps={reps}\n");
            text.push_str("feature_index,feature_name,corr_mean,corr_sd,normalized_mi,mwu_p\n");
            for row in &rows {
                let pd: Vec<f64> = (0..m.n_rows())
                    .filter(|&i| y[i] == 1)
                    .map(|i| columns[row.feature][i])
                    .filter(|v| v.is_finite())
                    .collect();
                let hc: Vec<f64> = (0..m.n_rows())
                    .filter(|&i| y[i] == 0)
                    .map(|i| columns[row.feature][i])
                    .filter(|v| v.is_finite())
                    .collect();
                let mwu_p = match mann_whitney(&pd, &hc) {
                    Ok((_, p)) => p,
                    Err(_) => f64::NAN,
                };
                let nmi = normalized_mi(&columns[row.feature], &y).unwrap_or(f64::NAN);
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.feature, names[row.feature], row.mean_r, row.sd_r, nmi, mwu_p
                ));
            }
            if !excluded.is_empty() {
                eprintln!("excluded zero-variance features: {excluded:?}");
            }
            std::fs::write(out_dir.join("correlations.csv"), text)?;
            if age_top > 0 {
                let top: Vec<usize> = rows.iter().take(age_top).map(|r| r.feature).collect();
                let assoc =
                    voicescreen::eval::age_association(&columns, &m.labels, &m.ages, &top)?;
                for a in assoc {
                    let mut scatter = format!("# feature={} r={}\nage,value\n", a.feature, a.r);
                    for (age, v) in &a.scatter {
                        scatter.push_str(&format!("{age},{v}\n"));
                    }
                    std::fs::write(
                        out_dir.join(format!("age_feature_{}.csv", a.feature)),
                        scatter,
                    )?;
                    eprintln!(
                        "feature {} vs age: r={:.3} (n={}, dropped {})",
                        a.feature, a.r, a.n_used, a.n_dropped
                    );
                }
            }
            eprintln!("wrote {}", out_dir.join("correlations.csv").display());
        }
        Command::Select {
            features,
            out_dir,
            top_k,
            run,
        } => {
            std::fs::create_dir_all(&out_dir)?;
            let m = load_features(&features)?;
            let cohort = CohortFilter::parse(&run.cohort)?;
            let m = filter_cohort(&m, cohort)?;
            let y = m.binary_labels()?;
            let columns = m.columns();
            let result = voicescreen::fselect::selection_protocol(
                &columns,
                &y,
                &voicescreen::fselect::ProtocolConfig {
                    reps: run.reps,
                    folds: run.folds,
                    top_k,
                    seed: run.seed,
                },
            )?;
            let mut cfg = file_cfg.clone();
            cfg.seed = run.seed;
            cfg.reps = run.reps;
            cfg.folds = run.folds;
            cfg.top_k = top_k;
            cfg.cohort = cohort;
            let hash = cfg.hash();
            for tally in &result.tallies {
                std::fs::write(
                    out_dir.join(format!("tally_{}.csv", tally.algorithm.name())),
                    tally_csv(tally, hash, run.seed),
                )?;
                std::fs::write(
                    out_dir.join(format!("ranking_{}.csv", tally.algorithm.name())),
                    ranking_csv(&tally.ranking(), hash, run.seed),
                )?;
            }
            eprintln!("wrote rankings and tallies to {}", out_dir.display());
        }
        Command::Train {
            features,
            model,
            model_type,
            trees,
            ranking,
            n_features,
            seed,
        } => {
            let m = load_features(&features)?;
            let y = m.binary_labels()?;
            let subset = subset_from(&ranking, n_features)?;
            let all_columns = m.columns();
            let columns: Vec<Vec<f64>> = match &subset {
                Some(s) => s.iter().map(|&j| all_columns[j].clone()).collect(),
                None => all_columns,
            };
            let json = match model_type.as_str() {
                "rf" => {
                    let forest = rf_train(
                        &columns,
                        &y,
                        &ForestConfig {
                            n_trees: trees,
                            seed,
                            ..Default::default()
                        },
                    )?;
                    serde_json::json!({
                        "model_type": "rf",
                        "subset": subset,
                        "model": forest,
                    })
                }
                "nb" => {
                    let nb = nb_train(&columns, &y)?;
                    serde_json::json!({
                        "model_type": "nb",
                        "subset": subset,
                        "model": nb,
                    })
                }
                other => return Err(Error::Config(format!("unknown model type {other:?}"))),
            };
            std::fs::write(
                &model,
                serde_json::to_string(&json).map_err(|e| Error::InvalidInput(e.to_string()))?,
            )?;
            eprintln!("wrote model -> {}", model.display());
        }
        Command::Predict {
            model,
            features,
            out,
        } => {
            let text = std::fs::read_to_string(&model)?;
            let doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("model parse: {e}")))?;
            let subset: Option<Vec<usize>> =
                serde_json::from_value(doc["subset"].clone()).unwrap_or(None);
            let m = load_features(&features)?;
            let take_row = |i: usize| -> Vec<f64> {
                match &subset {
                    Some(s) => s.iter().map(|&j| m.row(i)[j]).collect(),
                    None => m.row(i).to_vec(),
                }
            };
            let mut csv = String::from("id,prediction,probability\n");
            match doc["model_type"].as_str() {
                Some("rf") => {
                    let forest: ForestModel = serde_json::from_value(doc["model"].clone())
                        .map_err(|e| Error::InvalidInput(format!("model parse: {e}")))?;
                    for i in 0..m.n_rows() {
                        let p = rf_predict(&forest, &take_row(i))?;
                        let label = if p.class == 1 { Label::Pd } else { Label::Hc };
                        csv.push_str(&format!("{},{},{}\n", m.ids[i], label, p.probability));
                    }
                }
                Some("nb") => {
                    let nb: voicescreen::classify::NaiveBayesModel =
                        serde_json::from_value(doc["model"].clone())
                            .map_err(|e| Error::InvalidInput(format!("model parse: {e}")))?;
                    for i in 0..m.n_rows() {
                        let c = voicescreen::classify::nb_predict(&nb, &take_row(i))?;
                        let label = if c == 1 { Label::Pd } else { Label::Hc };
                        csv.push_str(&format!("{},{},\n", m.ids[i], label));
                    }
                }
                _ => return Err(Error::InvalidInput("model file missing model_type".into())),
            }
            std::fs::write(&out, csv)?;
            eprintln!("wrote predictions -> {}", out.display());
        }
        Command::Eval {
            features,
            out,
            model,
            trees,
            ranking,
            n_features,
            run,
        } => {
            let m = load_features(&features)?;
            let cohort = CohortFilter::parse(&run.cohort)?;
            let m = filter_cohort(&m, cohort)?;
            let y = m.binary_labels()?;
            let columns = m.columns();
            let subset = subset_from(&ranking, n_features)?;
            let model_kind = match model.as_str() {
                "rf" => ModelKind::Rf { n_trees: trees },
                "nb" => ModelKind::NaiveBayes,
                "random" => ModelKind::Random,
                other => return Err(Error::Config(format!("unknown model {other:?}"))),
            };
            let cv = make_cv(&run, model_kind)?;
            let report = cross_validate(&columns, &y, Some(&m.ids), subset.as_deref(), &cv)?;
            std::fs::write(
                &out,
                serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::InvalidInput(e.to_string()))?,
            )?;
            eprintln!(
                "balanced accuracy {:.3} +- {:.3} -> {}",
                report.aggregate.balanced_accuracy.mean,
                report.aggregate.balanced_accuracy.sd,
                out.display()
            );
        }
        Command::Sweep {
            features,
            rankings_dir,
            out,
            sizes,
            trees,
            run,
        } => {
            let m = load_features(&features)?;
            let cohort = CohortFilter::parse(&run.cohort)?;
            let m = filter_cohort(&m, cohort)?;
            let y = m.binary_labels()?;
            let columns = m.columns();
            let sizes: Vec<usize> = sizes
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad size {s:?}")))
                })
                .collect::<Result<_>>()?;
            let mut rankings = Vec::new();
            for alg in Algorithm::ALL {
                let path = rankings_dir.join(format!("ranking_{}.csv", alg.name()));
                if path.exists() {
                    rankings.push(read_ranking_csv(&path)?);
                }
            }
            if rankings.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "no ranking_*.csv files in {}",
                    rankings_dir.display()
                )));
            }
            let cv = make_cv(&run, ModelKind::Rf { n_trees: trees })?;
            let rows = voicescreen::eval::feature_sweep(
                &columns,
                &y,
                Some(&m.ids),
                &rankings,
                &sizes,
                &cv,
            )?;
            let mut cfg = file_cfg.clone();
            cfg.seed = run.seed;
            cfg.sizes = sizes;
            std::fs::write(&out, sweep_csv(&rows, cfg.hash(), run.seed))?;
            eprintln!("wrote sweep -> {}", out.display());
        }
        Command::Pipeline {
            features,
            out_dir,
            sex_split,
            sizes,
            trees,
            top_k,
            run,
        } => {
            let m = load_features(&features)?;
            let mut cfg = file_cfg.clone();
            cfg.seed = run.seed;
            cfg.reps = run.reps;
            cfg.folds = run.folds;
            cfg.grouping = Grouping::parse(&run.grouping)?;
            cfg.cohort = CohortFilter::parse(&run.cohort)?;
            cfg.sex_split = sex_split;
            cfg.n_trees = trees;
            cfg.top_k = top_k;
            cfg.sizes = sizes
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad size {s:?}")))
                })
                .collect::<Result<_>>()?;
            let summary = run_pipeline(&m, &cfg, &out_dir)?;
            eprintln!("{summary}");
            eprintln!("outputs in {}", out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and --version print to stdout and exit 0; real usage
            // errors exit 1.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
