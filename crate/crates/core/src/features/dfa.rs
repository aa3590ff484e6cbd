//! Detrended fluctuation analysis: the scaling exponent of detrended RMS
//! fluctuation against window size. ~0.5 for white noise, ~1.5 for a random
//! walk.

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};

const MIN_WINDOW: usize = 50;
const N_SIZES: usize = 12;

pub fn dfa(rec: &Recording) -> Result<f64> {
    dfa_series(&rec.samples)
}

pub fn dfa_series(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 4 * MIN_WINDOW {
        return Err(Error::TooShort(format!(
            "dfa needs at least {} samples, have {n}",
            4 * MIN_WINDOW
        )));
    }
    let m = dsp::mean(x);
    // Integrated profile.
    let mut profile = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &v in x {
        acc += v - m;
        profile.push(acc);
    }

    // Log-spaced window sizes between MIN_WINDOW and n/4.
    let lo = (MIN_WINDOW as f64).ln();
    let hi = (n as f64 / 4.0).ln();
    let mut sizes: Vec<usize> = (0..N_SIZES)
        .map(|i| (lo + (hi - lo) * i as f64 / (N_SIZES - 1) as f64).exp().round() as usize)
        .collect();
    sizes.dedup();

    let mut log_s = Vec::new();
    let mut log_f = Vec::new();
    for &s in &sizes {
        let k = n / s;
        if k < 2 {
            continue;
        }
        let mut ss = 0.0;
        for w in 0..k {
            let seg = &profile[w * s..(w + 1) * s];
            let xs: Vec<f64> = (0..s).map(|i| i as f64).collect();
            let (slope, intercept) = dsp::linear_fit(&xs, seg);
            for (i, &y) in seg.iter().enumerate() {
                let r = y - (slope * i as f64 + intercept);
                ss += r * r;
            }
        }
        let f = (ss / (k * s) as f64).sqrt();
        if f <= 0.0 {
            return Err(Error::DegenerateSignal(
                "dfa: zero fluctuation (constant signal)".into(),
            ));
        }
        log_s.push((s as f64).ln());
        log_f.push(f.ln());
    }
    if log_s.len() < 4 {
        return Err(Error::TooShort("dfa: too few usable window sizes".into()));
    }
    let (alpha, _) = dsp::linear_fit(&log_s, &log_f);
    Ok(alpha)
}
