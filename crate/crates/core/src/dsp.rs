//! Shared signal-processing and statistics helpers.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 points.
pub fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (x.len() - 1) as f64).sqrt()
}

/// Population standard deviation (n denominator).
pub fn std_pop(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / x.len() as f64).sqrt()
}

/// Linear-interpolation percentile of an unsorted slice, `p` in [0, 100].
pub fn percentile(x: &[f64], p: f64) -> f64 {
    assert!(!x.is_empty(), "percentile of empty slice");
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    percentile_sorted(&s, p)
}

pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn median(x: &[f64]) -> f64 {
    percentile(x, 50.0)
}

/// Teager-Kaiser energy operator, psi(x_n) = x_n^2 - x_{n-1} x_{n+1}.
/// Output has length n - 2 (interior points only).
pub fn tkeo(x: &[f64]) -> Vec<f64> {
    if x.len() < 3 {
        return Vec::new();
    }
    (1..x.len() - 1)
        .map(|i| x[i] * x[i] - x[i - 1] * x[i + 1])
        .collect()
}

pub fn hann(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

pub fn hamming(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Magnitude spectrum of `frame` zero-padded to `nfft`; returns nfft/2 + 1 bins.
pub fn magnitude_spectrum(frame: &[f64], nfft: usize) -> Vec<f64> {
    debug_assert!(nfft >= frame.len());
    let mut buf: Vec<Complex<f64>> = frame.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(nfft, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    buf[..nfft / 2 + 1].iter().map(|c| c.norm()).collect()
}

/// Hilbert envelope |analytic signal| via the FFT method.
pub fn hilbert_envelope(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let nfft = n.next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(nfft, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(nfft).process(&mut buf);
    // Analytic signal: keep DC and Nyquist, double positive frequencies,
    // zero negative frequencies.
    for (i, c) in buf.iter_mut().enumerate() {
        if i == 0 || i == nfft / 2 {
            continue;
        } else if i < nfft / 2 {
            *c *= 2.0;
        } else {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(nfft).process(&mut buf);
    buf[..n].iter().map(|c| c.norm() / nfft as f64).collect()
}

/// Zero-phase band-pass [lo, hi) Hz via FFT masking.
pub fn fft_bandpass(x: &[f64], sample_rate: f64, lo: f64, hi: f64) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let nfft = n.next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(nfft, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(nfft).process(&mut buf);
    let df = sample_rate / nfft as f64;
    for i in 0..nfft {
        // Frequency of bin i (mirrored for the upper half).
        let f = if i <= nfft / 2 {
            i as f64 * df
        } else {
            (nfft - i) as f64 * df
        };
        if f < lo || f >= hi {
            buf[i] = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(nfft).process(&mut buf);
    buf[..n].iter().map(|c| c.re / nfft as f64).collect()
}

/// Normalized autocorrelation of `x` at `lag`:
/// sum x_i x_{i+lag} / sqrt(sum x_i^2 * sum x_{i+lag}^2).
pub fn autocorr_at(x: &[f64], lag: usize) -> f64 {
    if lag >= x.len() {
        return 0.0;
    }
    let n = x.len() - lag;
    let mut cross = 0.0;
    let mut e_a = 0.0;
    let mut e_b = 0.0;
    for i in 0..n {
        cross += x[i] * x[i + lag];
        e_a += x[i] * x[i];
        e_b += x[i + lag] * x[i + lag];
    }
    let denom = (e_a * e_b).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        cross / denom
    }
}

/// Least-squares line fit; returns (slope, intercept).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..xs.len() {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if sxx == 0.0 || n < 2.0 {
        return (0.0, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Shannon entropy in nats of a probability vector (0 ln 0 := 0).
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Parabolic interpolation of a peak at index `i` of `y`; returns the
/// fractional offset in [-0.5, 0.5] of the true vertex relative to `i`.
pub fn parabolic_offset(y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= y.len() {
        return 0.0;
    }
    let denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
    if denom.abs() < 1e-30 {
        return 0.0;
    }
    (0.5 * (y[i - 1] - y[i + 1]) / denom).clamp(-0.5, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 100.0), 4.0);
        assert!((percentile(&v, 50.0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn tkeo_of_constant_is_zero() {
        let v = [2.0; 8];
        assert!(tkeo(&v).iter().all(|&e| e == 0.0));
    }

    #[test]
    fn autocorr_of_periodic_signal() {
        let x: Vec<f64> = (0..800)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / 80.0).sin())
            .collect();
        assert!(autocorr_at(&x, 80) > 0.99);
        assert!(autocorr_at(&x, 40) < -0.9);
    }

    #[test]
    fn hilbert_envelope_of_modulated_tone() {
        // 1 kHz carrier with slow amplitude modulation: the envelope should
        // track the modulator.
        let sr = 8000.0;
        let x: Vec<f64> = (0..4096)
            .map(|i| {
                let t = i as f64 / sr;
                let a = 1.0 + 0.5 * (2.0 * std::f64::consts::PI * 5.0 * t).sin();
                a * (2.0 * std::f64::consts::PI * 1000.0 * t).sin()
            })
            .collect();
        let env = hilbert_envelope(&x);
        for i in (200..3800).step_by(97) {
            let t = i as f64 / sr;
            let a = 1.0 + 0.5 * (2.0 * std::f64::consts::PI * 5.0 * t).sin();
            assert!((env[i] - a).abs() < 0.08, "envelope off at {i}: {} vs {a}", env[i]);
        }
    }

    #[test]
    fn bandpass_keeps_in_band_tone() {
        let sr = 8000.0;
        let x: Vec<f64> = (0..8000)
            .map(|i| {
                let t = i as f64 / sr;
                (2.0 * std::f64::consts::PI * 300.0 * t).sin()
                    + (2.0 * std::f64::consts::PI * 3000.0 * t).sin()
            })
            .collect();
        let low = fft_bandpass(&x, sr, 0.0, 500.0);
        let p_low: f64 = low.iter().map(|v| v * v).sum::<f64>() / low.len() as f64;
        // One unit-amplitude sine has mean power 0.5.
        assert!((p_low - 0.5).abs() < 0.02, "low band power {p_low}");
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 7.0).collect();
        let (m, b) = linear_fit(&xs, &ys);
        assert!((m - 3.0).abs() < 1e-9);
        assert!((b + 7.0).abs() < 1e-9);
    }
}
