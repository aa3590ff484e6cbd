//! Vocal fold excitation ratios: energy, nonlinear energy (TKEO), and
//! entropy contrasts between the sub-2.5 kHz "signal" region and the
//! super-2.5 kHz "noise" region, over 500 Hz bands.

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};

use super::gne::{band_signals, BAND_HZ};

pub const SPLIT_HZ: f64 = 2500.0;
const FRAME_S: f64 = 0.025;
const HOP_S: f64 = 0.010;

fn mean_tkeo(x: &[f64]) -> f64 {
    let t = dsp::tkeo(x);
    dsp::mean(&t).max(0.0)
}

/// Nine VFER measures:
/// {mean, std} of the frame-wise low/high energy ratio in dB,
/// entropy of the band-energy distribution,
/// {SNR, NSR} x {energy, TKEO, entropy}.
pub fn vfer_family(rec: &Recording) -> Result<Vec<f64>> {
    if rec.sample_rate != 8000 {
        return Err(Error::InvalidInput(format!(
            "band plan assumes 8000 Hz sampling, got {}",
            rec.sample_rate
        )));
    }
    if rec.duration() < 1.0 {
        return Err(Error::TooShort(format!(
            "need at least 1 s of signal, have {:.3} s",
            rec.duration()
        )));
    }
    let sr = rec.sample_rate as f64;
    let low = dsp::fft_bandpass(&rec.samples, sr, 0.0, SPLIT_HZ);
    let high = dsp::fft_bandpass(&rec.samples, sr, SPLIT_HZ, sr / 2.0);

    // Frame-wise low/high energy ratio in dB.
    let flen = (FRAME_S * sr) as usize;
    let hop = (HOP_S * sr) as usize;
    let mut ratios = Vec::new();
    let mut start = 0;
    while start + flen <= rec.samples.len() {
        let e_low: f64 = low[start..start + flen].iter().map(|v| v * v).sum();
        let e_high: f64 = high[start..start + flen].iter().map(|v| v * v).sum();
        let r = 10.0 * (e_low.max(1e-15) / e_high.max(1e-15)).log10();
        ratios.push(r.clamp(-60.0, 60.0));
        start += hop;
    }
    if ratios.is_empty() {
        return Err(Error::TooShort("vfer: no full frames".into()));
    }

    // Band-energy distribution over the eight 500 Hz bands.
    let bands = band_signals(rec);
    let energies: Vec<f64> = bands.iter().map(|b| b.iter().map(|v| v * v).sum()).collect();
    let split_band = (SPLIT_HZ / BAND_HZ) as usize;
    let total: f64 = energies.iter().sum::<f64>().max(1e-300);
    let probs: Vec<f64> = energies.iter().map(|e| e / total).collect();
    let band_entropy = dsp::shannon_entropy(&probs) / (probs.len() as f64).ln();

    // Group entropies: spectral flatness of each region over its own bands.
    let group_entropy = |range: std::ops::Range<usize>| -> f64 {
        let e: Vec<f64> = energies[range].to_vec();
        let t: f64 = e.iter().sum::<f64>().max(1e-300);
        let p: Vec<f64> = e.iter().map(|v| v / t).collect();
        (dsp::shannon_entropy(&p) / (p.len() as f64).ln()).clamp(1e-6, 1.0)
    };
    let h_low = group_entropy(0..split_band);
    let h_high = group_entropy(split_band..energies.len());

    let e_low_total: f64 = energies[..split_band].iter().sum();
    let e_high_total: f64 = energies[split_band..].iter().sum();
    let t_low = mean_tkeo(&low);
    let t_high = mean_tkeo(&high);

    let clamp_ratio = |num: f64, den: f64| (num.max(1e-15) / den.max(1e-15)).clamp(1e-6, 1e6);

    Ok(vec![
        dsp::mean(&ratios),
        dsp::std_dev(&ratios),
        band_entropy,
        clamp_ratio(e_low_total, e_high_total),
        clamp_ratio(t_low, t_high),
        (h_high / h_low).clamp(1e-6, 1e6),
        clamp_ratio(e_high_total, e_low_total),
        clamp_ratio(t_high, t_low),
        (h_low / h_high).clamp(1e-6, 1e6),
    ])
}
