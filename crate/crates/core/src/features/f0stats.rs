//! F0 summary statistics, including the deviation from the expected healthy
//! F0 for sex-matched speakers.

use crate::audio::Sex;
use crate::dsp;
use crate::error::{Error, Result};
use crate::pitch::F0Contour;

/// Expected healthy F0 by sex, in Hz. Age-independent by default;
/// overridable through the run configuration.
#[derive(Debug, Clone, Copy)]
pub struct NormativeF0 {
    pub male: f64,
    pub female: f64,
}

impl Default for NormativeF0 {
    fn default() -> Self {
        NormativeF0 {
            male: 120.0,
            female: 190.0,
        }
    }
}

impl NormativeF0 {
    /// Expected F0 for a speaker; unknown sex falls back to the sex-pooled
    /// mean and reports it through the quality flag.
    pub fn expected(&self, sex: Sex) -> (f64, bool) {
        match sex {
            Sex::M => (self.male, false),
            Sex::F => (self.female, false),
            Sex::Unknown => ((self.male + self.female) / 2.0, true),
        }
    }
}

/// {median voiced F0 - expected F0, std of voiced F0, prc95 - prc5 of voiced
/// F0}. The boolean is the pooled-fallback quality flag.
pub fn f0_stats(
    contour: &F0Contour,
    sex: Sex,
    _age: Option<u32>,
    normative: &NormativeF0,
) -> Result<(Vec<f64>, bool)> {
    let f0 = contour.voiced_f0();
    if f0.is_empty() {
        return Err(Error::Unvoiced);
    }
    let (expected, pooled) = normative.expected(sex);
    let mut sorted = f0.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = dsp::percentile_sorted(&sorted, 50.0);
    let range = dsp::percentile_sorted(&sorted, 95.0) - dsp::percentile_sorted(&sorted, 5.0);
    Ok((vec![median - expected, dsp::std_dev(&f0), range], pooled))
}
