//! Fundamental-frequency estimation and per-cycle period/amplitude
//! extraction.
//!
//! The tracker scores log-spaced pitch candidates against the square-root
//! magnitude spectrum with a sawtooth-inspired kernel: positive weight at the
//! harmonics of the candidate, negative weight at the valleys halfway
//! between, with 1/sqrt(h) harmonic decay. The normalized kernel/spectrum
//! inner product serves as the pitch-strength score; frames below the voicing
//! threshold are marked unvoiced.

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};

/// Pitch tracker configuration.
#[derive(Debug, Clone, Copy)]
pub struct PitchConfig {
    pub f0_min: f64,
    pub f0_max: f64,
    /// Hop between frame centers in seconds.
    pub hop_s: f64,
    /// Frames with pitch strength below this are marked unvoiced.
    pub voicing_threshold: f64,
    /// Candidate grid resolution in steps per octave.
    pub candidates_per_octave: usize,
}

impl Default for PitchConfig {
    fn default() -> Self {
        // The 0.2 voicing threshold is calibrated against this tracker's own
        // strength scale (isolated line ~0.5, sawtooth ~0.85, white noise
        // under 0.11 at the 99th percentile): it keeps heavily breathy
        // phonations (5 dB HNR) voiced while rejecting noise.
        PitchConfig {
            f0_min: 70.0,
            f0_max: 400.0,
            hop_s: 0.010,
            voicing_threshold: 0.2,
            candidates_per_octave: 96,
        }
    }
}

/// Per-frame fundamental-frequency contour. `f0 = 0` marks unvoiced frames.
#[derive(Debug, Clone)]
pub struct F0Contour {
    /// Frame centers in seconds, strictly increasing with constant hop.
    pub times: Vec<f64>,
    /// Estimated F0 per frame in Hz; 0 for unvoiced frames.
    pub f0: Vec<f64>,
    /// Pitch strength per frame in [0, 1].
    pub strength: Vec<f64>,
    /// Hop in seconds.
    pub hop: f64,
}

impl F0Contour {
    pub fn voiced_f0(&self) -> Vec<f64> {
        self.f0.iter().copied().filter(|&f| f > 0.0).collect()
    }

    pub fn n_voiced(&self) -> usize {
        self.f0.iter().filter(|&&f| f > 0.0).count()
    }

    pub fn median_voiced_f0(&self) -> Option<f64> {
        let v = self.voiced_f0();
        if v.is_empty() {
            None
        } else {
            Some(dsp::median(&v))
        }
    }
}

/// Successive vocal-fold cycle periods and per-cycle peak amplitudes.
#[derive(Debug, Clone)]
pub struct CycleSequence {
    /// Period of each cycle in seconds; all positive and finite.
    pub periods: Vec<f64>,
    /// Peak |amplitude| within each cycle; same length as `periods`.
    pub amplitudes: Vec<f64>,
    /// Refined cycle-mark positions in samples (one more than periods when
    /// a single chain spans the recording; chains across voiced gaps are
    /// concatenated, with across-gap periods excluded).
    pub marks: Vec<f64>,
}

/// Estimate the F0 contour of a gated/trimmed recording.
pub fn estimate_f0(rec: &Recording, cfg: &PitchConfig) -> Result<F0Contour> {
    if cfg.f0_min >= cfg.f0_max {
        return Err(Error::InvalidInput("f0_min must be below f0_max".into()));
    }
    let sr = rec.sample_rate as f64;
    if cfg.f0_max >= sr / 2.0 {
        return Err(Error::InvalidInput(format!(
            "f0_max {} Hz must be below Nyquist {}",
            cfg.f0_max,
            sr / 2.0
        )));
    }

    // Analysis window sized so the Hann main-lobe half-width (2 sr / window)
    // stays under a quarter of the valley spacing f0_min / 2; otherwise the
    // kernel valleys sample their own harmonic's spectral skirt and carve a
    // dip at the true pitch. This also satisfies the two-periods-of-the-
    // longest-candidate minimum. 1024 samples at 8 kHz and 70 Hz.
    let min_window = (8.0 * sr / cfg.f0_min).ceil() as usize;
    let window = min_window.next_power_of_two();
    if rec.samples.len() < window {
        return Err(Error::TooShort(format!(
            "need at least {} samples for one analysis window, have {}",
            window,
            rec.samples.len()
        )));
    }
    let nfft = (window * 8).next_power_of_two();
    let hop = ((cfg.hop_s * sr).round() as usize).max(1);
    let win = dsp::hann(window);

    // Log-spaced candidate grid.
    let octaves = (cfg.f0_max / cfg.f0_min).log2();
    let n_cand = (octaves * cfg.candidates_per_octave as f64).ceil() as usize + 1;
    let candidates: Vec<f64> = (0..n_cand)
        .map(|i| cfg.f0_min * 2f64.powf(i as f64 / cfg.candidates_per_octave as f64))
        .filter(|&f| f <= cfg.f0_max * 1.0001)
        .collect();

    // Precompute kernel sample points and normalization per candidate.
    let nyquist = sr / 2.0;
    let df = sr / nfft as f64;
    struct Kernel {
        f: f64,
        harmonics: Vec<(f64, f64)>, // (frequency, weight)
        norm_k: f64,
    }
    let kernels: Vec<Kernel> = candidates
        .iter()
        .map(|&f| {
            let h_max = ((nyquist / f) - 0.5).floor() as usize;
            let mut pts = Vec::with_capacity(h_max.max(1));
            let mut norm = 0.0;
            for h in 1..=h_max.max(1) {
                let w = 1.0 / (h as f64).sqrt();
                pts.push((h as f64 * f, w));
                norm += w * w * 1.5; // peak + two half-weight valleys
            }
            Kernel {
                f,
                harmonics: pts,
                norm_k: norm.sqrt(),
            }
        })
        .collect();

    let n_frames = (rec.samples.len() - window) / hop + 1;
    let mut times = Vec::with_capacity(n_frames);
    let mut f0s = Vec::with_capacity(n_frames);
    let mut strengths = Vec::with_capacity(n_frames);

    let interp = |spec: &[f64], freq: f64| -> f64 {
        let pos = freq / df;
        let lo = pos.floor() as usize;
        if lo + 1 >= spec.len() {
            return 0.0;
        }
        let frac = pos - lo as f64;
        spec[lo] + (spec[lo + 1] - spec[lo]) * frac
    };

    let mut frame_buf = vec![0.0f64; window];
    for k in 0..n_frames {
        let start = k * hop;
        for i in 0..window {
            frame_buf[i] = rec.samples[start + i] * win[i];
        }
        let mag = dsp::magnitude_spectrum(&frame_buf, nfft);
        // Square-root compression flattens the harmonic rolloff so the
        // 1/sqrt(h) kernel matches a sawtooth-like source.
        let smag: Vec<f64> = mag.iter().map(|&m| m.sqrt()).collect();
        let s_full = smag.iter().map(|v| v * v).sum::<f64>().sqrt();

        // Pitch strength = kernel/spectrum inner product over the candidate's
        // harmonics (positive) and inter-harmonic valleys (negative),
        // normalized by the kernel norm and the full-spectrum norm.
        // Normalizing over the whole spectrum keeps octave errors down: a
        // candidate that explains only part of the harmonic comb pays for the
        // energy it leaves unexplained. The constant calibrates the score so
        // an isolated spectral line lands near 0.5 (a zero-padded Hann main
        // lobe holds ~8x the point-sampled mass in the sqrt-magnitude norm).
        const LINE_CALIBRATION: f64 = 4.7;
        let mut scores = Vec::with_capacity(kernels.len());
        for kern in &kernels {
            let mut dot = 0.0;
            for &(hf, w) in &kern.harmonics {
                let peak = interp(&smag, hf);
                let v_lo = interp(&smag, hf - 0.5 * kern.f);
                let v_hi = interp(&smag, hf + 0.5 * kern.f);
                dot += w * (peak - 0.5 * v_lo - 0.5 * v_hi);
            }
            let denom = kern.norm_k * s_full;
            scores.push(if denom > 1e-12 {
                LINE_CALIBRATION * dot / denom
            } else {
                0.0
            });
        }

        let (best_i, &best_s) = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let strength = best_s.clamp(0.0, 1.0);
        let f0 = if strength >= cfg.voicing_threshold {
            // Parabolic refinement over log2-frequency.
            let offset = dsp::parabolic_offset(&scores, best_i);
            let log2_f = (candidates[best_i]).log2() + offset / cfg.candidates_per_octave as f64;
            2f64.powf(log2_f).clamp(cfg.f0_min, cfg.f0_max)
        } else {
            0.0
        };
        times.push((start + window / 2) as f64 / sr);
        f0s.push(f0);
        strengths.push(strength);
    }

    Ok(F0Contour {
        times,
        f0: f0s,
        strength: strengths,
        hop: hop as f64 / sr,
    })
}

/// Place cycle marks at successive waveform peaks guided by the local F0 and
/// derive per-cycle periods and peak amplitudes. Mark positions are refined
/// by parabolic interpolation so sub-sample jitter survives quantization.
pub fn extract_cycles(rec: &Recording, contour: &F0Contour) -> Result<CycleSequence> {
    if contour.n_voiced() == 0 {
        return Err(Error::Unvoiced);
    }
    let sr = rec.sample_rate as f64;
    let x = &rec.samples;
    let hop_samples = (contour.hop * sr).round() as usize;

    // Local period in samples at sample index i, from the nearest frame.
    let frame_of = |i: usize| -> usize {
        if contour.times.is_empty() {
            return 0;
        }
        let first_center = (contour.times[0] * sr) as usize;
        let idx = i.saturating_sub(first_center) / hop_samples.max(1);
        idx.min(contour.f0.len() - 1)
    };
    let local_period = |i: usize| -> Option<f64> {
        let f = contour.f0[frame_of(i)];
        if f > 0.0 {
            Some(sr / f)
        } else {
            None
        }
    };

    // Contiguous voiced regions in frame indices.
    let mut regions: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &f) in contour.f0.iter().enumerate() {
        if f > 0.0 {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            regions.push((s, i));
        }
    }
    if let Some(s) = start {
        regions.push((s, contour.f0.len()));
    }

    let mut periods = Vec::new();
    let mut amplitudes = Vec::new();
    let mut all_marks = Vec::new();

    for (fs, fe) in regions {
        // Sample span of this voiced region.
        let t0 = (contour.times[fs] * sr) as usize;
        let t1 = (((contour.times[fe - 1] + contour.hop) * sr) as usize).min(x.len());
        if t1 <= t0 {
            continue;
        }
        // Anchor on the strongest positive peak in the region (marks track
        // the positive-peak convention of glottal pulses).
        let anchor = (t0..t1)
            .max_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap())
            .unwrap();

        // Only accept interior local maxima as marks: a boundary argmax is a
        // truncation artifact, not a vocal-fold cycle peak.
        let is_local_max = |i: usize| i > 0 && i + 1 < x.len() && x[i] >= x[i - 1] && x[i] >= x[i + 1];

        // Normalized cross-correlation of one-period patches at integer lag:
        // disambiguates between near-equal resonance crests within a cycle
        // (raw argmax hops between crests and injects ~1% spurious jitter).
        let ncc = |center: usize, lag: isize, q: usize| -> f64 {
            let c2 = center as isize + lag;
            if center < q || center + q >= x.len() || c2 < q as isize || c2 as usize + q >= x.len()
            {
                return f64::NEG_INFINITY;
            }
            let c2 = c2 as usize;
            let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
            for j in 0..=2 * q {
                let a = x[center - q + j];
                let b = x[c2 - q + j];
                dot += a * b;
                na += a * a;
                nb += b * b;
            }
            let denom = (na * nb).sqrt();
            if denom > 0.0 {
                dot / denom
            } else {
                f64::NEG_INFINITY
            }
        };

        // Pick the next mark in [lo, hi]: among local maxima within 95% of
        // the window peak, take the one whose cycle patch best matches the
        // current mark's patch; refine the step to sub-sample precision on
        // the correlation peak.
        let step = |cur: usize, lo: usize, hi: usize, p: f64| -> Option<(usize, f64)> {
            let q = ((0.35 * p).round() as usize).max(2);
            let window_max = (lo..=hi).map(|i| x[i]).fold(f64::NEG_INFINITY, f64::max);
            let mut best: Option<(usize, f64)> = None;
            for i in lo..=hi {
                if !is_local_max(i) || x[i] < 0.95 * window_max {
                    continue;
                }
                let score = ncc(cur, i as isize - cur as isize, q);
                match best {
                    Some((_, s)) if score <= s => {}
                    _ => best = Some((i, score)),
                }
            }
            let (c, _) = best?;
            // The correlation vertex may sit a few samples off the waveform
            // crest when cycles are asymmetric: find the integer-lag
            // correlation maximum near the crest first, then interpolate.
            let lag0 = c as isize - cur as isize;
            let lag = (lag0 - 3..=lag0 + 3)
                .max_by(|&a, &b| ncc(cur, a, q).partial_cmp(&ncc(cur, b, q)).unwrap())
                .unwrap();
            let y = [
                ncc(cur, lag - 1, q),
                ncc(cur, lag, q),
                ncc(cur, lag + 1, q),
            ];
            let delta = if y.iter().all(|v| v.is_finite()) {
                let denom = y[0] - 2.0 * y[1] + y[2];
                if denom.abs() > 1e-30 {
                    (0.5 * (y[0] - y[2]) / denom).clamp(-0.5, 0.5)
                } else {
                    0.0
                }
            } else {
                0.0
            };
            Some((c, lag as f64 + delta))
        };

        let anchor_refined = anchor as f64 + dsp::parabolic_offset(x, anchor);
        let mut marks: Vec<usize> = vec![anchor];
        let mut refined: Vec<f64> = vec![anchor_refined];
        // Walk forward.
        let mut cur = anchor;
        while let Some(p) = local_period(cur) {
            let lo = cur + (0.8 * p).round() as usize;
            let hi = cur + (1.25 * p).round() as usize;
            if hi >= t1 || lo >= hi {
                break;
            }
            let Some((next, lag)) = step(cur, lo, hi, p) else {
                break;
            };
            refined.push(refined.last().unwrap() + lag);
            marks.push(next);
            cur = next;
        }
        // Walk backward.
        cur = anchor;
        let mut head_refined = anchor_refined;
        while let Some(p) = local_period(cur) {
            let step_lo = (0.8 * p).round() as usize;
            let step_hi = (1.25 * p).round() as usize;
            if cur < t0 + step_lo {
                break;
            }
            let hi = cur - step_lo;
            let lo = cur.saturating_sub(step_hi).max(t0);
            if lo >= hi {
                break;
            }
            let Some((next, lag)) = step(cur, lo, hi, p) else {
                break;
            };
            if next == cur {
                break;
            }
            head_refined += lag;
            marks.insert(0, next);
            refined.insert(0, head_refined);
            cur = next;
        }
        if marks.len() < 2 {
            continue;
        }

        for w in refined.windows(2) {
            periods.push((w[1] - w[0]) / sr);
        }
        // Per-cycle amplitude = interpolated peak height of the crest that
        // opens the cycle. The raw sample value varies a few percent with
        // sampling phase and picks up broadband noise, both of which would
        // masquerade as shimmer; a 3-tap smooth (a constant, phase-free gain
        // on the crest) plus parabolic vertex interpolation removes both.
        let smooth = |i: usize| -> f64 {
            if i > 0 && i + 1 < x.len() {
                0.25 * x[i - 1] + 0.5 * x[i] + 0.25 * x[i + 1]
            } else {
                x[i]
            }
        };
        for &m in &marks[..marks.len() - 1] {
            let amp = if m > 1 && m + 2 < x.len() {
                let (y0, y1, y2) = (smooth(m - 1), smooth(m), smooth(m + 1));
                let denom = y0 - 2.0 * y1 + y2;
                if denom.abs() > 1e-30 {
                    y1 - (y0 - y2) * (y0 - y2) / (8.0 * denom)
                } else {
                    y1
                }
            } else {
                x[m]
            };
            amplitudes.push(amp.abs());
        }
        all_marks.extend(refined);
    }

    if periods.is_empty() {
        return Err(Error::Unvoiced);
    }
    Ok(CycleSequence {
        periods,
        amplitudes,
        marks: all_marks,
    })
}
