//! Harmonics-to-noise and noise-to-harmonics ratios from per-frame
//! autocorrelation at the local pitch period.

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};
use crate::pitch::F0Contour;

/// HNR is capped here so noiseless synthetic input stays finite.
pub const HNR_CAP_DB: f64 = 40.0;

/// Per-frame autocorrelation HNR/NHR: {mean HNR dB, std HNR dB, mean NHR,
/// std NHR} over voiced frames. NHR is the linear noise/harmonic power ratio.
pub fn hnr_nhr(rec: &Recording, contour: &F0Contour) -> Result<Vec<f64>> {
    if contour.n_voiced() == 0 {
        return Err(Error::Unvoiced);
    }
    let sr = rec.sample_rate as f64;
    let x = &rec.samples;
    let mut hnrs = Vec::new();
    let mut nhrs = Vec::new();

    for (k, &f0) in contour.f0.iter().enumerate() {
        if f0 <= 0.0 {
            continue;
        }
        let lag = (sr / f0).round() as usize;
        if lag == 0 {
            continue;
        }
        let center = (contour.times[k] * sr) as usize;
        let win = (3 * lag).max(256);
        let start = center.saturating_sub(win / 2);
        let end = (start + win).min(x.len());
        if end - start < 2 * lag + 3 {
            continue;
        }
        let mut chunk: Vec<f64> = x[start..end].to_vec();
        let m = dsp::mean(&chunk);
        for v in &mut chunk {
            *v -= m;
        }
        // Search a few lags around the nominal period for the local maximum,
        // then refine to the fractional-lag peak by parabolic interpolation:
        // the true period rarely falls on an integer sample and the rounding
        // error alone would cap measurable HNR near 25 dB.
        let lags: Vec<usize> = (lag.saturating_sub(3).max(1)..=lag + 3)
            .filter(|&l| l < chunk.len())
            .collect();
        if lags.len() < 3 {
            continue;
        }
        let rs: Vec<f64> = lags.iter().map(|&l| dsp::autocorr_at(&chunk, l)).collect();
        let best = rs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let mut r = rs[best];
        if best > 0 && best + 1 < rs.len() {
            let denom = rs[best - 1] - 2.0 * rs[best] + rs[best + 1];
            if denom < 0.0 {
                let off = 0.5 * (rs[best - 1] - rs[best + 1]) / denom;
                if off.abs() <= 1.0 {
                    r = rs[best] - 0.25 * (rs[best - 1] - rs[best + 1]) * off;
                }
            }
        }
        if !r.is_finite() {
            continue;
        }
        let r = r.clamp(1e-4, 1.0 - 1e-4);
        let hnr = (10.0 * (r / (1.0 - r)).log10()).clamp(-HNR_CAP_DB, HNR_CAP_DB);
        hnrs.push(hnr);
        nhrs.push(((1.0 - r) / r).clamp(0.0, 1e4));
    }

    if hnrs.is_empty() {
        return Err(Error::Unvoiced);
    }
    Ok(vec![
        dsp::mean(&hnrs),
        dsp::std_dev(&hnrs),
        dsp::mean(&nhrs),
        dsp::std_dev(&nhrs),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pitch::{estimate_f0, PitchConfig};
    use crate::synth::{synthesize, SynthSpec};

    #[test]
    fn target_hnr_recovered() {
        for &target in &[10.0, 20.0, 30.0] {
            let spec = SynthSpec {
                f0: 120.0,
                hnr_db: target,
                seed: 4,
                ..SynthSpec::default()
            };
            let rec = synthesize(&spec).unwrap();
            let contour = estimate_f0(&rec, &PitchConfig::default()).unwrap();
            let v = hnr_nhr(&rec, &contour).unwrap();
            assert!(
                (v[0] - target).abs() < 3.0,
                "target {target} dB, measured {:.2} dB",
                v[0]
            );
        }
    }

    #[test]
    fn noiseless_tone_hits_cap_region() {
        let sr = 8000.0;
        let x: Vec<f64> = (0..24000)
            .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 150.0 * i as f64 / sr).sin())
            .collect();
        let rec = Recording::new("t", x, 8000).unwrap();
        let contour = estimate_f0(&rec, &PitchConfig::default()).unwrap();
        let v = hnr_nhr(&rec, &contour).unwrap();
        assert!(v[0] >= 35.0, "mean HNR {}", v[0]);
        assert!(v[0] <= HNR_CAP_DB);
    }

    #[test]
    fn white_noise_low_hnr() {
        use rand::Rng;
        let mut means = Vec::new();
        for seed in 0..20 {
            let mut rng = crate::rng::rng_from_seed(seed);
            let x: Vec<f64> = (0..16000).map(|_| rng.random_range(-0.5..0.5)).collect();
            let rec = Recording::new("n", x, 8000).unwrap();
            // Noise is unvoiced; force a nominal contour to probe the measure.
            let n = 100;
            let contour = F0Contour {
                times: (0..n).map(|i| 0.2 + i as f64 * 0.01).collect(),
                f0: vec![120.0; n],
                strength: vec![0.5; n],
                hop: 0.01,
            };
            means.push(hnr_nhr(&rec, &contour).unwrap()[0]);
        }
        let grand = dsp::mean(&means);
        assert!(grand <= 5.0, "white-noise mean HNR {grand}");
    }

    #[test]
    fn unvoiced_contour_errors() {
        let rec = Recording::new("t", vec![0.1; 8000], 8000).unwrap();
        let contour = F0Contour {
            times: vec![0.1],
            f0: vec![0.0],
            strength: vec![0.0],
            hop: 0.01,
        };
        assert!(matches!(hnr_nhr(&rec, &contour), Err(Error::Unvoiced)));
    }
}
