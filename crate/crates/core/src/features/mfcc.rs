//! Mel-frequency cepstral coefficients: frame-wise log-energy plus MFCC 0-12
//! (25 ms window, 10 ms hop, 20-filter mel bank over 0-4 kHz, DCT-II), with
//! delta and delta-delta regressions; the 42 features are the per-recording
//! means of all streams.

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};

const N_FILTERS: usize = 20;
const N_CEPS: usize = 13; // c0..c12
const FRAME_S: f64 = 0.025;
const HOP_S: f64 = 0.010;
const MIN_FRAMES: usize = 5;
/// Delta regression half-window.
const DELTA_N: usize = 2;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filterbank over [0, sr/2]: (n_filters x n_bins).
fn mel_filterbank(sr: f64, nfft: usize) -> Vec<Vec<f64>> {
    let n_bins = nfft / 2 + 1;
    let mel_max = hz_to_mel(sr / 2.0);
    let centers: Vec<f64> = (0..N_FILTERS + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (N_FILTERS + 1) as f64))
        .collect();
    let hz_of_bin = |b: usize| b as f64 * sr / nfft as f64;
    (0..N_FILTERS)
        .map(|m| {
            let (lo, mid, hi) = (centers[m], centers[m + 1], centers[m + 2]);
            (0..n_bins)
                .map(|b| {
                    let f = hz_of_bin(b);
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= mid {
                        (f - lo) / (mid - lo)
                    } else {
                        (hi - f) / (hi - mid)
                    }
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II of `v`, first `k` coefficients.
fn dct2(v: &[f64], k: usize) -> Vec<f64> {
    let m = v.len() as f64;
    (0..k)
        .map(|j| {
            let scale = if j == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
            scale
                * v.iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        x * (std::f64::consts::PI * j as f64 * (i as f64 + 0.5) / m).cos()
                    })
                    .sum::<f64>()
        })
        .collect()
}

/// HTK-style delta regression over +-DELTA_N frames with edge replication.
fn delta(stream: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let t_max = stream.len();
    let dim = stream[0].len();
    let denom: f64 = 2.0 * (1..=DELTA_N).map(|n| (n * n) as f64).sum::<f64>();
    (0..t_max)
        .map(|t| {
            (0..dim)
                .map(|d| {
                    let mut acc = 0.0;
                    for n in 1..=DELTA_N {
                        let fwd = stream[(t + n).min(t_max - 1)][d];
                        let bwd = stream[t.saturating_sub(n)][d];
                        acc += n as f64 * (fwd - bwd);
                    }
                    acc / denom
                })
                .collect()
        })
        .collect()
}

/// Per-frame feature streams: log-energy followed by c0..c12 (14 values).
pub fn mfcc_frames(rec: &Recording) -> Result<Vec<Vec<f64>>> {
    let sr = rec.sample_rate as f64;
    let flen = (FRAME_S * sr).round() as usize;
    let hop = (HOP_S * sr).round() as usize;
    if rec.samples.len() < flen + (MIN_FRAMES - 1) * hop {
        return Err(Error::TooShort(format!(
            "mfcc needs at least {MIN_FRAMES} frames"
        )));
    }
    let nfft = flen.next_power_of_two();
    let window = dsp::hamming(flen);
    let bank = mel_filterbank(sr, nfft);

    let mut frames = Vec::new();
    let mut start = 0;
    while start + flen <= rec.samples.len() {
        let frame: Vec<f64> = rec.samples[start..start + flen]
            .iter()
            .zip(&window)
            .map(|(x, w)| x * w)
            .collect();
        let energy: f64 = rec.samples[start..start + flen].iter().map(|x| x * x).sum();
        let log_energy = (energy + 1e-12).ln();

        let mag = dsp::magnitude_spectrum(&frame, nfft);
        let power: Vec<f64> = mag.iter().map(|m| m * m).collect();
        let mel_log: Vec<f64> = bank
            .iter()
            .map(|filt| {
                let e: f64 = filt.iter().zip(&power).map(|(f, p)| f * p).sum();
                (e + 1e-12).ln()
            })
            .collect();
        let ceps = dct2(&mel_log, N_CEPS);

        let mut row = Vec::with_capacity(1 + N_CEPS);
        row.push(log_energy);
        row.extend(ceps);
        frames.push(row);
        start += hop;
    }
    Ok(frames)
}

/// The 42 MFCC-family features: means of the 14 static streams, their deltas,
/// and their delta-deltas.
pub fn mfcc_family(rec: &Recording) -> Result<Vec<f64>> {
    let frames = mfcc_frames(rec)?;
    let d1 = delta(&frames);
    let d2 = delta(&d1);
    let mut out = Vec::with_capacity(42);
    for stream in [&frames, &d1, &d2] {
        for d in 0..stream[0].len() {
            let col: Vec<f64> = stream.iter().map(|r| r[d]).collect();
            out.push(dsp::mean(&col));
        }
    }
    debug_assert_eq!(out.len(), 42);
    Ok(out)
}
