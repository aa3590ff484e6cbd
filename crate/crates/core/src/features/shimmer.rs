//! Amplitude perturbation (shimmer) variants: 21 measures over the per-cycle
//! peak amplitude sequence.

use crate::dsp;
use crate::error::{Error, Result};
use crate::pitch::CycleSequence;

pub const MIN_CYCLES: usize = 11;

fn pct(num: f64, denom: f64) -> f64 {
    if denom.abs() < 1e-300 {
        0.0
    } else {
        100.0 * num / denom
    }
}

fn apq(a: &[f64], k: usize, mean_a: f64) -> f64 {
    let n = a.len();
    if n < 2 * k + 1 {
        return 0.0;
    }
    let devs: Vec<f64> = (k..n - k)
        .map(|i| (a[i] - dsp::mean(&a[i - k..=i + k])).abs())
        .collect();
    pct(dsp::mean(&devs), mean_a)
}

/// Compute the 21 shimmer variants. Requires at least 11 cycles.
pub fn shimmer_family(cycles: &CycleSequence) -> Result<Vec<f64>> {
    let a = &cycles.amplitudes;
    if a.len() < MIN_CYCLES {
        return Err(Error::InsufficientCycles {
            found: a.len(),
            needed: MIN_CYCLES,
        });
    }
    let mean_a = dsp::mean(a);
    let abs_diff: Vec<f64> = a.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let db_ratios: Vec<f64> = a
        .windows(2)
        .map(|w| 20.0 * (w[1].max(1e-12) / w[0].max(1e-12)).log10())
        .collect();

    let mut out = Vec::with_capacity(21);
    // local %, local dB
    out.push(pct(dsp::mean(&abs_diff), mean_a));
    out.push(dsp::mean(&db_ratios.iter().map(|d| d.abs()).collect::<Vec<_>>()));
    // APQ3, APQ5, APQ11
    out.push(apq(a, 1, mean_a));
    out.push(apq(a, 2, mean_a));
    out.push(apq(a, 5, mean_a));
    // DDA
    let dd: Vec<f64> = (1..a.len() - 1)
        .map(|i| ((a[i + 1] - a[i]) - (a[i] - a[i - 1])).abs())
        .collect();
    out.push(pct(dsp::mean(&dd), mean_a));

    // TKEO of the amplitude sequence.
    let t = dsp::tkeo(a);
    out.push(dsp::mean(&t));
    out.push(dsp::std_dev(&t));
    {
        let mut s = t;
        s.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if s.is_empty() {
            out.extend([0.0; 5]);
        } else {
            for p in [5.0, 25.0, 50.0, 75.0, 95.0] {
                out.push(dsp::percentile_sorted(&s, p));
            }
        }
    }

    // Percentiles of |dA| / mean amplitude, in percent.
    {
        let mut rel: Vec<f64> = abs_diff.iter().map(|&d| pct(d, mean_a)).collect();
        rel.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for p in [5.0, 25.0, 50.0, 75.0, 95.0] {
            out.push(dsp::percentile_sorted(&rel, p));
        }
    }

    // Range ratio, coefficient of variation, dB-shimmer std.
    let max = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = a.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(if max + min > 0.0 { (max - min) / (max + min) } else { 0.0 });
    out.push(if mean_a > 0.0 { dsp::std_dev(a) / mean_a } else { 0.0 });
    out.push(dsp::std_dev(&db_ratios));

    debug_assert_eq!(out.len(), 21);
    Ok(out)
}
