//! Glottal-to-noise excitation: cross-correlations of Hilbert envelopes
//! across 500 Hz bands. A glottal pulse excites all bands simultaneously, so
//! high envelope correlation across distant bands marks pulse-driven
//! (non-turbulent) excitation.

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};

pub const BAND_HZ: f64 = 500.0;
/// Maximum envelope lag examined in the cross-correlation, seconds.
const MAX_LAG_S: f64 = 0.003;

fn check_input(rec: &Recording) -> Result<()> {
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
    Ok(())
}

pub(crate) fn band_signals(rec: &Recording) -> Vec<Vec<f64>> {
    let sr = rec.sample_rate as f64;
    let n_bands = (sr / 2.0 / BAND_HZ) as usize;
    (0..n_bands)
        .map(|b| {
            dsp::fft_bandpass(
                &rec.samples,
                sr,
                b as f64 * BAND_HZ,
                (b + 1) as f64 * BAND_HZ,
            )
        })
        .collect()
}

/// Max normalized cross-correlation of two envelopes over small lags.
fn envelope_xcorr(a: &[f64], b: &[f64], max_lag: usize) -> f64 {
    let ma = dsp::mean(a);
    let mb = dsp::mean(b);
    let ca: Vec<f64> = a.iter().map(|&v| v - ma).collect();
    let cb: Vec<f64> = b.iter().map(|&v| v - mb).collect();
    let na: f64 = ca.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = cb.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na <= 0.0 || nb <= 0.0 {
        return 0.0;
    }
    let n = a.len();
    let mut best = f64::NEG_INFINITY;
    for lag in 0..=max_lag {
        let mut dot_pos = 0.0;
        let mut dot_neg = 0.0;
        for i in 0..n - lag {
            dot_pos += ca[i] * cb[i + lag];
            dot_neg += ca[i + lag] * cb[i];
        }
        best = best.max(dot_pos.max(dot_neg) / (na * nb));
    }
    best.clamp(0.0, 1.0)
}

fn mean_tkeo(x: &[f64]) -> f64 {
    let t = dsp::tkeo(x);
    dsp::mean(&t).max(0.0)
}

/// Six GNE measures: {mean, std} of pairwise envelope correlations, plus
/// SNR/NSR in energy and TKEO weightings where the "signal" share of each
/// band is its best cross-band envelope correlation.
pub fn gne_family(rec: &Recording) -> Result<Vec<f64>> {
    check_input(rec)?;
    let bands = band_signals(rec);
    let envs: Vec<Vec<f64>> = bands.iter().map(|b| dsp::hilbert_envelope(b)).collect();
    let max_lag = (MAX_LAG_S * rec.sample_rate as f64).round() as usize;

    let n = envs.len();
    let mut rho = vec![vec![0.0f64; n]; n];
    let mut pair_values = Vec::new();
    for i in 0..n {
        // Bands at least 1 kHz apart: adjacent 500 Hz bands share leakage.
        for j in i + 2..n {
            let r = envelope_xcorr(&envs[i], &envs[j], max_lag);
            rho[i][j] = r;
            rho[j][i] = r;
            pair_values.push(r);
        }
    }

    let band_rho: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| rho[i][j]).fold(0.0, f64::max))
        .collect();
    let energies: Vec<f64> = bands.iter().map(|b| b.iter().map(|v| v * v).sum()).collect();
    let tkeos: Vec<f64> = bands.iter().map(|b| mean_tkeo(b)).collect();

    let ratio = |weights: &[f64]| -> (f64, f64) {
        let s: f64 = weights.iter().zip(&band_rho).map(|(w, r)| w * r).sum();
        let nse: f64 = weights.iter().zip(&band_rho).map(|(w, r)| w * (1.0 - r)).sum();
        let snr_db = (10.0 * (s.max(1e-12) / nse.max(1e-12)).log10()).clamp(-40.0, 40.0);
        let nsr = (nse / s.max(1e-12)).clamp(0.0, 1e4);
        (snr_db, nsr)
    };
    let (snr_e, nsr_e) = ratio(&energies);
    let (snr_t, nsr_t) = ratio(&tkeos);

    Ok(vec![
        dsp::mean(&pair_values),
        dsp::std_dev(&pair_values),
        snr_e,
        snr_t,
        nsr_e,
        nsr_t,
    ])
}
