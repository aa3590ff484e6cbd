//! Empirical mode decomposition and EMD excitation ratios. Sifting peels
//! intrinsic mode functions from fast to slow; the first two IMFs hold the
//! high-frequency constituents (noise in practice), the remainder the signal.

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};

const MAX_IMFS: usize = 10;
const MAX_SIFTS: usize = 12;
/// Cauchy stopping criterion on successive sift iterates.
const SIFT_SD: f64 = 0.2;

/// Natural cubic spline through (xs, ys), evaluated at 0..n-1.
/// xs must be strictly increasing integer sample positions.
fn spline_envelope(xs: &[usize], ys: &[f64], n: usize) -> Vec<f64> {
    let k = xs.len();
    if k == 0 {
        return vec![0.0; n];
    }
    if k == 1 {
        return vec![ys[0]; n];
    }
    if k == 2 {
        // Linear between the two knots, extended flat.
        let (x0, x1) = (xs[0] as f64, xs[1] as f64);
        return (0..n)
            .map(|i| {
                let t = ((i as f64 - x0) / (x1 - x0)).clamp(0.0, 1.0);
                ys[0] + t * (ys[1] - ys[0])
            })
            .collect();
    }
    // Solve for second derivatives with natural boundary conditions
    // (tridiagonal system, Thomas algorithm).
    let xf: Vec<f64> = xs.iter().map(|&v| v as f64).collect();
    let mut a = vec![0.0; k];
    let mut b = vec![0.0; k];
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    b[0] = 1.0;
    b[k - 1] = 1.0;
    for i in 1..k - 1 {
        let h0 = xf[i] - xf[i - 1];
        let h1 = xf[i + 1] - xf[i];
        a[i] = h0;
        b[i] = 2.0 * (h0 + h1);
        c[i] = h1;
        d[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    let mut cp = vec![0.0; k];
    let mut dp = vec![0.0; k];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..k {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut m2 = vec![0.0; k];
    m2[k - 1] = dp[k - 1];
    for i in (0..k - 1).rev() {
        m2[i] = dp[i] - cp[i] * m2[i + 1];
    }

    let mut out = vec![0.0; n];
    let mut seg = 0;
    for (i, item) in out.iter_mut().enumerate() {
        let x = i as f64;
        while seg + 2 < k && x > xf[seg + 1] {
            seg += 1;
        }
        let (x0, x1) = (xf[seg], xf[seg + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        // Clamp extrapolation beyond the outermost knots to the knot values.
        if x < x0 {
            *item = ys[seg];
        } else if x > x1 && seg + 2 >= k {
            *item = ys[seg + 1];
        } else {
            let aa = 1.0 - t;
            *item = aa * ys[seg]
                + t * ys[seg + 1]
                + ((aa * aa * aa - aa) * m2[seg] + (t * t * t - t) * m2[seg + 1]) * h * h / 6.0;
        }
    }
    out
}

fn local_extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..x.len() - 1 {
        if x[i] > x[i - 1] && x[i] >= x[i + 1] {
            maxima.push(i);
        } else if x[i] < x[i - 1] && x[i] <= x[i + 1] {
            minima.push(i);
        }
    }
    (maxima, minima)
}

/// Decompose `x` into intrinsic mode functions plus a residual.
pub fn emd(x: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = x.len();
    let mut residual = x.to_vec();
    let mut imfs = Vec::new();

    for _ in 0..MAX_IMFS {
        let (maxima, minima) = local_extrema(&residual);
        if maxima.len() < 2 || minima.len() < 2 {
            break; // residual is monotone-ish: done
        }
        let mut h = residual.clone();
        for _ in 0..MAX_SIFTS {
            let (mut mx, mut mn) = local_extrema(&h);
            if mx.len() < 2 || mn.len() < 2 {
                break;
            }
            // Anchor envelopes at the signal ends to tame edge swings.
            if mx[0] != 0 {
                mx.insert(0, 0);
            }
            if *mx.last().unwrap() != n - 1 {
                mx.push(n - 1);
            }
            if mn[0] != 0 {
                mn.insert(0, 0);
            }
            if *mn.last().unwrap() != n - 1 {
                mn.push(n - 1);
            }
            let upper = spline_envelope(&mx, &mx.iter().map(|&i| h[i]).collect::<Vec<_>>(), n);
            let lower = spline_envelope(&mn, &mn.iter().map(|&i| h[i]).collect::<Vec<_>>(), n);
            let mut sd_num = 0.0;
            let mut sd_den = 0.0;
            let mut next = vec![0.0; n];
            for i in 0..n {
                let m = 0.5 * (upper[i] + lower[i]);
                next[i] = h[i] - m;
                sd_num += m * m;
                sd_den += h[i] * h[i];
            }
            let sd = if sd_den > 0.0 { sd_num / sd_den } else { 0.0 };
            h = next;
            if sd < SIFT_SD * SIFT_SD {
                break;
            }
        }
        for i in 0..n {
            residual[i] -= h[i];
        }
        imfs.push(h);
    }
    (imfs, residual)
}

fn mean_tkeo(x: &[f64]) -> f64 {
    let t = dsp::tkeo(x);
    dsp::mean(&t).max(0.0)
}

/// Normalized amplitude-histogram entropy of a signal (30 bins over +-4 sd).
fn amplitude_entropy(x: &[f64]) -> f64 {
    let sd = dsp::std_pop(x);
    if sd <= 0.0 {
        return 1e-6;
    }
    const BINS: usize = 30;
    let m = dsp::mean(x);
    let mut hist = vec![0u64; BINS];
    for &v in x {
        let pos = ((v - m) / (8.0 * sd) + 0.5) * BINS as f64;
        let idx = (pos.max(0.0) as usize).min(BINS - 1);
        hist[idx] += 1;
    }
    let probs: Vec<f64> = hist.iter().map(|&c| c as f64 / x.len() as f64).collect();
    (dsp::shannon_entropy(&probs) / (BINS as f64).ln()).clamp(1e-6, 1.0)
}

/// Six EMD excitation ratios: IMFs 1-2 are the "noise" part, everything else
/// (including the residual) the "signal" part; {SNR, NSR} x {energy, TKEO,
/// entropy}.
pub fn emd_er_family(rec: &Recording) -> Result<Vec<f64>> {
    if rec.duration() < 1.0 {
        return Err(Error::TooShort(format!(
            "need at least 1 s of signal, have {:.3} s",
            rec.duration()
        )));
    }
    let (imfs, _residual) = emd(&rec.samples);
    let n = rec.samples.len();
    let mut noise = vec![0.0; n];
    for imf in imfs.iter().take(2) {
        for i in 0..n {
            noise[i] += imf[i];
        }
    }
    let signal: Vec<f64> = rec.samples.iter().zip(&noise).map(|(x, v)| x - v).collect();

    let e = |v: &[f64]| v.iter().map(|s| s * s).sum::<f64>();
    let clamp_ratio = |num: f64, den: f64| (num.max(1e-15) / den.max(1e-15)).clamp(1e-6, 1e6);

    let (es, en) = (e(&signal), e(&noise));
    let (ts, tn) = (mean_tkeo(&signal), mean_tkeo(&noise));
    let (hs, hn) = (amplitude_entropy(&signal), amplitude_entropy(&noise));

    Ok(vec![
        clamp_ratio(es, en),
        clamp_ratio(ts, tn),
        (hn / hs).clamp(1e-6, 1e6),
        clamp_ratio(en, es),
        clamp_ratio(tn, ts),
        (hs / hn).clamp(1e-6, 1e6),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emd_separates_fast_from_slow() {
        // Slow tone + weak fast noise: IMFs 1-2 should capture the noise,
        // leaving the tone in the later modes. Power ratio by construction
        // is 50:1, so the measured SNR-energy must be >= 10.
        let sr = 8000.0;
        let mut rng = crate::rng::rng_from_seed(13);
        let x: Vec<f64> = (0..12000)
            .map(|i| {
                let tone = (2.0 * std::f64::consts::PI * 120.0 * i as f64 / sr).sin();
                let noise = crate::rng::normal(&mut rng) * (0.5f64 / 50.0).sqrt();
                tone * 0.5f64.sqrt() + noise
            })
            .collect();
        let rec = Recording::new("t", x, 8000).unwrap();
        let v = emd_er_family(&rec).unwrap();
        assert!(v[0] >= 10.0, "EMD SNR energy {}", v[0]);
    }

    #[test]
    fn imf_plus_residual_reconstructs_signal() {
        let mut rng = crate::rng::rng_from_seed(3);
        let x: Vec<f64> = (0..4000)
            .map(|i| {
                (2.0 * std::f64::consts::PI * 100.0 * i as f64 / 8000.0).sin()
                    + 0.3 * crate::rng::normal(&mut rng)
            })
            .collect();
        let (imfs, residual) = emd(&x);
        assert!(!imfs.is_empty());
        for i in (0..x.len()).step_by(131) {
            let total: f64 = imfs.iter().map(|imf| imf[i]).sum::<f64>() + residual[i];
            assert!((total - x[i]).abs() < 1e-9, "reconstruction at {i}");
        }
    }

    #[test]
    fn six_finite_values() {
        let rec = crate::synth::synthesize(&crate::synth::SynthSpec {
            hnr_db: 15.0,
            seed: 30,
            ..Default::default()
        })
        .unwrap();
        let v = emd_er_family(&rec).unwrap();
        assert_eq!(v.len(), 6);
        assert!(v.iter().all(|x| x.is_finite()));
    }
}
