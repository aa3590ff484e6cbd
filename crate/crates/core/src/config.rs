//! Run configuration: flat `key = value` config files with CLI override, and
//! the config hash embedded in every output file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::Grouping;

/// Cohort filter for evaluation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CohortFilter {
    All,
    Female,
    Male,
}

impl CohortFilter {
    pub fn parse(s: &str) -> Result<CohortFilter> {
        match s {
            "all" => Ok(CohortFilter::All),
            "female" => Ok(CohortFilter::Female),
            "male" => Ok(CohortFilter::Male),
            other => Err(Error::Config(format!("unknown cohort filter {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CohortFilter::All => "all",
            CohortFilter::Female => "female",
            CohortFilter::Male => "male",
        }
    }
}

/// Pipeline-level configuration. Defaults follow the published protocol:
/// 2 s gate, 10x10 CV, 500-tree forest, the ten sweep sizes.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub min_duration: f64,
    pub cohort: CohortFilter,
    pub algorithm: crate::fselect::Algorithm,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub folds: usize,
    pub grouping: Grouping,
    pub top_k: usize,
    pub n_trees: usize,
    /// Produce female/male sections alongside the all-recordings summary.
    pub sex_split: bool,
    pub expected_f0_m: f64,
    pub expected_f0_f: f64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            min_duration: 2.0,
            cohort: CohortFilter::All,
            algorithm: crate::fselect::Algorithm::Gso,
            sizes: crate::eval::DEFAULT_SWEEP_SIZES.to_vec(),
            reps: 10,
            folds: 10,
            grouping: Grouping::Recording,
            top_k: 100,
            n_trees: 500,
            sex_split: false,
            expected_f0_m: 120.0,
            expected_f0_f: 190.0,
            threads: None,
        }
    }
}

impl RunConfig {
    /// Parse a flat `key = value` file; `#` starts a comment. Unknown keys
    /// are rejected so typos cannot silently fall back to defaults.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let text = std::fs::read_to_string(path.as_ref())?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad {what} value {value:?}"));
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "min_duration" => self.min_duration = value.parse().map_err(|_| bad("min_duration"))?,
            "cohort" => self.cohort = CohortFilter::parse(value)?,
            "algorithm" => self.algorithm = crate::fselect::Algorithm::parse(value)?,
            "sizes" => {
                self.sizes = value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| bad("sizes")))
                    .collect::<Result<_>>()?;
            }
            "reps" => self.reps = value.parse().map_err(|_| bad("reps"))?,
            "folds" => self.folds = value.parse().map_err(|_| bad("folds"))?,
            "grouping" => self.grouping = Grouping::parse(value)?,
            "top_k" => self.top_k = value.parse().map_err(|_| bad("top_k"))?,
            "n_trees" => self.n_trees = value.parse().map_err(|_| bad("n_trees"))?,
            "sex_split" => self.sex_split = value.parse().map_err(|_| bad("sex_split"))?,
            "expected_f0_m" => self.expected_f0_m = value.parse().map_err(|_| bad("expected_f0_m"))?,
            "expected_f0_f" => self.expected_f0_f = value.parse().map_err(|_| bad("expected_f0_f"))?,
            "threads" => self.threads = Some(value.parse().map_err(|_| bad("threads"))?),
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Canonical sorted `key = value` rendering; the config hash is FNV-1a
    /// over these bytes, so equal configurations hash equally regardless of
    /// source (file vs flags). The thread count is excluded: results are
    /// independent of parallelism.
    pub fn canonical(&self) -> String {
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        kv.insert("seed", self.seed.to_string());
        kv.insert("min_duration", format!("{}", self.min_duration));
        kv.insert("cohort", self.cohort.name().to_string());
        kv.insert("algorithm", self.algorithm.name().to_string());
        kv.insert(
            "sizes",
            self.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
        );
        kv.insert("reps", self.reps.to_string());
        kv.insert("folds", self.folds.to_string());
        kv.insert(
            "grouping",
            match self.grouping {
                Grouping::Recording => "recording".into(),
                Grouping::Participant => "participant".into(),
            },
        );
        kv.insert("top_k", self.top_k.to_string());
        kv.insert("n_trees", self.n_trees.to_string());
        kv.insert("sex_split", self.sex_split.to_string());
        kv.insert("expected_f0_m", format!("{}", self.expected_f0_m));
        kv.insert("expected_f0_f", format!("{}", self.expected_f0_f));
        kv.iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn hash(&self) -> u64 {
        fnv1a(self.canonical().as_bytes())
    }

    pub fn normative(&self) -> crate::features::NormativeF0 {
        crate::features::NormativeF0 {
            male: self.expected_f0_m,
            female: self.expected_f0_f,
        }
    }
}

/// FNV-1a 64-bit hash.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
