//! The 307-dimensional dysphonia feature vector and the per-recording
//! extraction pipeline.
//!
//! Families that cannot be computed for a recording (for example too few
//! cycles for the perturbation measures) are stored as NaN with a quality
//! flag; imputation happens at model time, never at extraction time.

pub mod dfa;
pub mod emd;
pub mod f0stats;
pub mod gne;
pub mod gq;
pub mod hnr;
pub mod jitter;
pub mod mfcc;
pub mod ppe;
pub mod registry;
pub mod rpde;
pub mod shimmer;
pub mod vfer;
pub mod wavelet;

use std::path::Path;

use crate::audio::{Label, Recording, Sex};
use crate::error::{Error, Result};
use crate::pitch::{estimate_f0, extract_cycles, CycleSequence, F0Contour, PitchConfig};

pub use f0stats::NormativeF0;
pub use registry::{family_of, feature_names, Family, N_FEATURES, REGISTRY_VERSION};

/// Extraction configuration shared across recordings.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureConfig {
    pub pitch: PitchConfig,
    pub normative: NormativeF0,
}

/// One recording's 307 feature values with per-value quality flags
/// (`true` = the value failed to compute and is stored as NaN).
#[derive(Debug, Clone)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub flags: Vec<bool>,
}

impl FeatureVector {
    fn nan() -> FeatureVector {
        FeatureVector {
            values: vec![f64::NAN; N_FEATURES],
            flags: vec![true; N_FEATURES],
        }
    }

    fn fill(&mut self, family: Family, result: Result<Vec<f64>>) -> Result<()> {
        let range = family.range();
        match result {
            Ok(vals) => {
                assert_eq!(vals.len(), range.len(), "family {family:?} size");
                for (i, v) in range.zip(vals) {
                    if v.is_finite() {
                        self.values[i] = v;
                        self.flags[i] = false;
                    } else {
                        self.values[i] = f64::NAN;
                        self.flags[i] = true;
                    }
                }
                Ok(())
            }
            Err(Error::Unvoiced) => Err(Error::Unvoiced),
            Err(_) => {
                for i in range {
                    self.values[i] = f64::NAN;
                    self.flags[i] = true;
                }
                Ok(())
            }
        }
    }
}

/// Compute all 13 families from prepared pitch artifacts. Only a fully
/// unvoiced recording is a hard error; any other family failure is imputed
/// as NaN + flag.
pub fn extract_all(
    rec: &Recording,
    contour: &F0Contour,
    cycles: &CycleSequence,
    sex: Sex,
    age: Option<u32>,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    if contour.n_voiced() == 0 {
        return Err(Error::Unvoiced);
    }
    let mut fv = FeatureVector::nan();
    fv.fill(Family::Jitter, jitter::jitter_family(cycles, contour))?;
    fv.fill(Family::Shimmer, shimmer::shimmer_family(cycles))?;
    fv.fill(Family::HnrNhr, hnr::hnr_nhr(rec, contour))?;
    fv.fill(Family::Gq, gq::gq(cycles))?;
    fv.fill(Family::Rpde, rpde::rpde(rec).map(|v| vec![v]))?;
    fv.fill(Family::Dfa, dfa::dfa(rec).map(|v| vec![v]))?;
    fv.fill(Family::Ppe, ppe::ppe(contour).map(|v| vec![v]))?;
    fv.fill(Family::Gne, gne::gne_family(rec))?;
    fv.fill(Family::Vfer, vfer::vfer_family(rec))?;
    fv.fill(Family::EmdEr, emd::emd_er_family(rec))?;
    fv.fill(Family::Mfcc, mfcc::mfcc_family(rec))?;
    match f0stats::f0_stats(contour, sex, age, &cfg.normative) {
        Ok((vals, pooled)) => {
            let start = Family::F0Related.range().start;
            fv.fill(Family::F0Related, Ok(vals))?;
            if pooled {
                // Expected-F0 fell back to the sex-pooled value.
                fv.flags[start] = true;
            }
        }
        Err(e) => {
            fv.fill(Family::F0Related, Err(e))?;
        }
    }
    fv.fill(Family::Wavelet, wavelet::wavelet_family(contour))?;
    Ok(fv)
}

/// Convenience wrapper: run the pitch tracker and cycle extractor, then all
/// families. The recording must already be trimmed/gated.
pub fn extract_features(rec: &Recording, cfg: &FeatureConfig) -> Result<FeatureVector> {
    let contour = estimate_f0(rec, &cfg.pitch)?;
    if contour.n_voiced() == 0 {
        return Err(Error::Unvoiced);
    }
    let cycles = match extract_cycles(rec, &contour) {
        Ok(c) => c,
        // No usable cycle marks: let the cycle-based families impute.
        Err(_) => CycleSequence {
            periods: Vec::new(),
            amplitudes: Vec::new(),
            marks: Vec::new(),
        },
    };
    extract_all(rec, &contour, &cycles, rec.sex, rec.age, cfg)
}

/// Feature matrix: one row per recording, 307 columns, with row metadata.
#[derive(Debug, Clone, Default)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub ages: Vec<Option<u32>>,
    pub sexes: Vec<Sex>,
    /// Row-major values, n_rows x N_FEATURES.
    pub values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * N_FEATURES..(i + 1) * N_FEATURES]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.values[i * N_FEATURES + j]).collect()
    }

    /// All columns, as a column-major copy.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..N_FEATURES).map(|j| self.column(j)).collect()
    }

    /// Binary labels as 0 = HC, 1 = PD. Errors on unknown labels.
    pub fn binary_labels(&self) -> Result<Vec<u8>> {
        self.labels
            .iter()
            .map(|l| match l {
                Label::Hc => Ok(0),
                Label::Pd => Ok(1),
                Label::Unknown => Err(Error::InvalidInput(
                    "recording without PD/HC label in labeled operation".into(),
                )),
            })
            .collect()
    }

    pub fn push_row(
        &mut self,
        id: String,
        label: Label,
        age: Option<u32>,
        sex: Sex,
        fv: &FeatureVector,
    ) {
        assert_eq!(fv.values.len(), N_FEATURES);
        assert!(!self.ids.contains(&id), "duplicate recording id {id}");
        self.ids.push(id);
        self.labels.push(label);
        self.ages.push(age);
        self.sexes.push(sex);
        self.values.extend_from_slice(&fv.values);
    }

    /// Serialize as CSV: a `# config_hash=... seed=...` comment line, then
    /// `id,label,age,sex` + the 307 canonical names; NaN spelled `NaN`.
    pub fn to_csv(&self, config_hash: u64, seed: u64) -> String {
        let mut out = format!("# config_hash={config_hash:016x} seed={seed}\n");
        out.push_str("id,label,age,sex");
        for name in feature_names() {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.n_rows() {
            let age = self.ages[i].map(|a| a.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}",
                self.ids[i], self.labels[i], age, self.sexes[i]
            ));
            for v in self.row(i) {
                out.push(',');
                if v.is_nan() {
                    out.push_str("NaN");
                } else {
                    out.push_str(&format!("{v}"));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, config_hash: u64, seed: u64) -> Result<()> {
        std::fs::write(path, self.to_csv(config_hash, seed))?;
        Ok(())
    }

    pub fn from_csv_str(text: &str) -> Result<FeatureMatrix> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("feature csv is empty".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() != 4 + N_FEATURES || cols[..4] != ["id", "label", "age", "sex"] {
            return Err(Error::InvalidInput(format!(
                "feature csv header mismatch: {} columns",
                cols.len()
            )));
        }
        for (j, name) in feature_names().iter().enumerate() {
            if cols[4 + j] != name {
                return Err(Error::InvalidInput(format!(
                    "feature column {} is {:?}, registry {REGISTRY_VERSION} expects {:?}",
                    j + 4,
                    cols[4 + j],
                    name
                )));
            }
        }
        let mut m = FeatureMatrix::default();
        for (lineno, line) in lines.enumerate() {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 + N_FEATURES {
                return Err(Error::InvalidInput(format!(
                    "feature csv line {}: {} fields",
                    lineno + 2,
                    parts.len()
                )));
            }
            let age = match parts[2].trim() {
                "" => None,
                s => Some(s.parse::<u32>().map_err(|_| {
                    Error::InvalidInput(format!("bad age {s:?} on line {}", lineno + 2))
                })?),
            };
            let mut vals = Vec::with_capacity(N_FEATURES);
            for p in &parts[4..] {
                let v = if *p == "NaN" {
                    f64::NAN
                } else {
                    p.parse::<f64>().map_err(|_| {
                        Error::InvalidInput(format!("bad value {p:?} on line {}", lineno + 2))
                    })?
                };
                vals.push(v);
            }
            let fv = FeatureVector {
                flags: vals.iter().map(|v| v.is_nan()).collect(),
                values: vals,
            };
            m.push_row(
                parts[0].to_string(),
                Label::parse(parts[1])?,
                age,
                Sex::parse(parts[3])?,
                &fv,
            );
        }
        Ok(m)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }
}
