//! Pitch period entropy: entropy of the prediction residual of the
//! log-semitone F0 sequence, after an order-2 linear predictor removes
//! healthy vibrato-like structure. Normalized to [0, 1].

use crate::dsp;
use crate::error::{Error, Result};
use crate::pitch::F0Contour;

const N_BINS: usize = 30;
/// Histogram span in semitones around zero residual.
const SPAN_ST: f64 = 6.0;

pub fn ppe(contour: &F0Contour) -> Result<f64> {
    let f0 = contour.voiced_f0();
    if f0.is_empty() {
        return Err(Error::Unvoiced);
    }
    if f0.len() < 10 {
        return Err(Error::TooShort(format!(
            "ppe needs at least 10 voiced frames, have {}",
            f0.len()
        )));
    }
    let f_ref = dsp::median(&f0);
    let s: Vec<f64> = f0.iter().map(|&f| 12.0 * (f / f_ref).log2()).collect();

    // Order-2 linear predictor, least squares over the sequence.
    let n = s.len();
    let (mut g11, mut g12, mut g22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in 2..n {
        g11 += s[t - 1] * s[t - 1];
        g12 += s[t - 1] * s[t - 2];
        g22 += s[t - 2] * s[t - 2];
        b1 += s[t] * s[t - 1];
        b2 += s[t] * s[t - 2];
    }
    let det = g11 * g22 - g12 * g12;
    let (a1, a2) = if det.abs() < 1e-12 {
        (0.0, 0.0)
    } else {
        ((b1 * g22 - b2 * g12) / det, (b2 * g11 - b1 * g12) / det)
    };

    let residuals: Vec<f64> = (2..n).map(|t| s[t] - a1 * s[t - 1] - a2 * s[t - 2]).collect();

    // Discretized density over a fixed semitone span; outliers clamp to the
    // edge bins so the density always sums to one.
    let mut hist = vec![0u64; N_BINS];
    for &r in &residuals {
        let pos = ((r + SPAN_ST) / (2.0 * SPAN_ST) * N_BINS as f64).floor();
        let idx = (pos.max(0.0) as usize).min(N_BINS - 1);
        hist[idx] += 1;
    }
    let total = residuals.len() as f64;
    let probs: Vec<f64> = hist.iter().map(|&c| c as f64 / total).collect();
    let h = dsp::shannon_entropy(&probs);
    Ok((h / (N_BINS as f64).ln()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contour_from(f0: Vec<f64>) -> F0Contour {
        let n = f0.len();
        F0Contour {
            times: (0..n).map(|i| i as f64 * 0.01).collect(),
            f0,
            strength: vec![0.8; n],
            hop: 0.01,
        }
    }

    #[test]
    fn constant_f0_near_zero() {
        let v = ppe(&contour_from(vec![150.0; 200])).unwrap();
        assert!(v <= 0.05, "constant-F0 PPE {v}");
    }

    #[test]
    fn random_walk_f0_high() {
        let mut rng = crate::rng::rng_from_seed(9);
        let mut f = 150.0f64;
        let f0: Vec<f64> = (0..300)
            .map(|_| {
                // ~1-semitone random steps: severely impaired F0 control.
                f *= 2f64.powf(crate::rng::normal(&mut rng) / 12.0);
                f = f.clamp(70.0, 400.0);
                f
            })
            .collect();
        let v = ppe(&contour_from(f0)).unwrap();
        assert!(v >= 0.5, "random-walk PPE {v}");
    }

    #[test]
    fn always_in_unit_interval() {
        use rand::Rng;
        for seed in 0..50 {
            let mut rng = crate::rng::rng_from_seed(seed);
            let f0: Vec<f64> = (0..100).map(|_| rng.random_range(70.0..400.0)).collect();
            let v = ppe(&contour_from(f0)).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn unvoiced_errors() {
        assert!(matches!(
            ppe(&contour_from(vec![0.0; 50])),
            Err(Error::Unvoiced)
        ));
    }
}
