//! Recurrence period density entropy: the normalized Shannon entropy of the
//! distribution of close-return times in a time-delay embedding of the
//! signal. Near 0 for strictly periodic signals, near 1 for noise.

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};

const EMBED_DIM: usize = 4;
/// Embedding delay in seconds (1 ms at 8 kHz).
const DELAY_S: f64 = 0.001;
/// Longest recurrence period tracked, in seconds (20 Hz).
const T_MAX_S: f64 = 0.05;
/// Close-return ball radius as a fraction of the embedded-signal scale.
const BALL_FRAC: f64 = 0.12;

pub fn rpde(rec: &Recording) -> Result<f64> {
    let sr = rec.sample_rate as f64;
    if rec.duration() < 1.0 {
        return Err(Error::TooShort(format!(
            "rpde needs at least 1 s of signal, have {:.3} s",
            rec.duration()
        )));
    }
    let tau = (DELAY_S * sr).round().max(1.0) as usize;
    let t_max = (T_MAX_S * sr).round() as usize;
    let x = &rec.samples;
    let span = (EMBED_DIM - 1) * tau;
    let n_states = x.len().saturating_sub(span);
    if n_states <= t_max {
        return Err(Error::TooShort("rpde: too few embedded states".into()));
    }

    let sigma = dsp::std_pop(x);
    if sigma <= 0.0 {
        return Err(Error::DegenerateSignal("rpde on constant signal".into()));
    }
    let eps = BALL_FRAC * sigma * (EMBED_DIM as f64).sqrt();
    let eps_sq = eps * eps;

    let dist_sq = |i: usize, j: usize| -> f64 {
        let mut d = 0.0;
        for k in 0..EMBED_DIM {
            let diff = x[i + k * tau] - x[j + k * tau];
            d += diff * diff;
        }
        d
    };

    // First close return after leaving the ball, per starting state.
    let mut hist = vec![0u64; t_max + 1];
    let mut total = 0u64;
    let mut i = 0;
    while i + t_max < n_states {
        let mut j = i + 1;
        // Leave the ball.
        while j < i + t_max && dist_sq(i, j) < eps_sq {
            j += 1;
        }
        // Return to it.
        let mut recorded = false;
        while j <= i + t_max {
            if dist_sq(i, j) < eps_sq {
                hist[j - i] += 1;
                total += 1;
                recorded = true;
                break;
            }
            j += 1;
        }
        // Hop ahead so successive starting states are loosely decorrelated.
        i += if recorded { 1 } else { 2 };
    }

    if total == 0 {
        // No recurrences at all: maximal uncertainty.
        return Ok(1.0);
    }
    let probs: Vec<f64> = hist
        .iter()
        .map(|&c| c as f64 / total as f64)
        .collect();
    let h = dsp::shannon_entropy(&probs);
    Ok((h / (t_max as f64).ln()).clamp(0.0, 1.0))
}
