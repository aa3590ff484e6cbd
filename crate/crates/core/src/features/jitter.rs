//! F0 perturbation (jitter) variants: 28 measures over the cycle-period
//! sequence ("cycles"/"pitch") and the per-frame F0 sequence ("F0").

use crate::dsp;
use crate::error::{Error, Result};
use crate::pitch::{CycleSequence, F0Contour};

pub const MIN_CYCLES: usize = 11;

/// Classic five perturbation variants of a positive sequence:
/// local %, local absolute (input units), RAP %, PPQ5 %, DDP %.
fn classic_five(x: &[f64]) -> [f64; 5] {
    let m = dsp::mean(x);
    let n = x.len();
    let abs_diff: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let local_abs = dsp::mean(&abs_diff);
    let local_pct = pct(local_abs, m);
    let rap = {
        let devs: Vec<f64> = (1..n - 1)
            .map(|i| (x[i] - (x[i - 1] + x[i] + x[i + 1]) / 3.0).abs())
            .collect();
        pct(dsp::mean(&devs), m)
    };
    let ppq5 = k_point_quotient(x, 2, m);
    let ddp = {
        let dd: Vec<f64> = (1..n - 1)
            .map(|i| ((x[i + 1] - x[i]) - (x[i] - x[i - 1])).abs())
            .collect();
        pct(dsp::mean(&dd), m)
    };
    [local_pct, local_abs, rap, ppq5, ddp]
}

/// Mean |x_i - mean(x_{i-k}..x_{i+k})| / reference, in percent.
fn k_point_quotient(x: &[f64], k: usize, reference: f64) -> f64 {
    let n = x.len();
    if n < 2 * k + 1 {
        return 0.0;
    }
    let devs: Vec<f64> = (k..n - k)
        .map(|i| {
            let w = &x[i - k..=i + k];
            (x[i] - dsp::mean(w)).abs()
        })
        .collect();
    pct(dsp::mean(&devs), reference)
}

fn pct(num: f64, denom: f64) -> f64 {
    if denom.abs() < 1e-300 {
        0.0
    } else {
        100.0 * num / denom
    }
}

/// Mean absolute consecutive difference over the sequence range (max - min);
/// 0 for constant sequences.
fn range_normalized_perturbation(x: &[f64]) -> f64 {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range <= 0.0 {
        return 0.0;
    }
    let abs_diff: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    dsp::mean(&abs_diff) / range
}

fn tkeo_percentiles(x: &[f64]) -> [f64; 5] {
    let t = dsp::tkeo(x);
    if t.is_empty() {
        return [0.0; 5];
    }
    let mut s = t;
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [5.0, 25.0, 50.0, 75.0, 95.0].map(|p| dsp::percentile_sorted(&s, p))
}

/// Compute the 28 jitter variants. Requires at least 11 cycles and 11 voiced
/// frames (the widest quotient window).
pub fn jitter_family(cycles: &CycleSequence, contour: &F0Contour) -> Result<Vec<f64>> {
    let periods = &cycles.periods;
    if periods.len() < MIN_CYCLES {
        return Err(Error::InsufficientCycles {
            found: periods.len(),
            needed: MIN_CYCLES,
        });
    }
    let f0: Vec<f64> = contour.voiced_f0();
    if f0.len() < MIN_CYCLES {
        return Err(Error::InsufficientCycles {
            found: f0.len(),
            needed: MIN_CYCLES,
        });
    }
    // Frame-level pitch periods in seconds.
    let pitch_periods: Vec<f64> = f0.iter().map(|&f| 1.0 / f).collect();

    let mut out = Vec::with_capacity(28);
    out.extend(classic_five(periods));
    out.extend(classic_five(&pitch_periods));

    // TKEO of the cycle-period sequence.
    let t_periods = dsp::tkeo(periods);
    out.push(dsp::mean(&t_periods));
    out.push(dsp::std_dev(&t_periods));
    out.extend(tkeo_percentiles(periods));
    out.extend(tkeo_percentiles(&f0));

    // Frequency perturbation quotients on the F0 values themselves.
    let mean_f0 = dsp::mean(&f0);
    out.push(k_point_quotient(&f0, 2, mean_f0));
    out.push(k_point_quotient(&f0, 5, mean_f0));

    let f0_abs_diff: Vec<f64> = f0.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    out.push(dsp::mean(&f0_abs_diff));
    out.push(dsp::std_dev(&f0_abs_diff));

    out.push(range_normalized_perturbation(periods));
    out.push(range_normalized_perturbation(&f0));

    debug_assert_eq!(out.len(), 28);
    Ok(out)
}
