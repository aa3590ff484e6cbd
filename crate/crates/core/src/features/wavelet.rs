//! Wavelet decomposition measures of the F0 contour: a 10-level periodized
//! Daubechies-4 DWT of the uniformly resampled contour (and its log), with
//! seven statistics per coefficient vector over the 10 detail vectors and
//! the level 1-3 approximations.

use crate::dsp;
use crate::error::{Error, Result};
use crate::pitch::F0Contour;

/// Daubechies-4 scaling (low-pass) filter, orthonormal (sum = sqrt 2).
const DB4_LO: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

pub const LEVELS: usize = 10;
const MIN_GRID: usize = 1024;

/// One level of the periodized orthonormal DWT: returns (approximation,
/// detail), each half the input length. Input length must be even.
fn dwt_step(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    debug_assert!(n >= 2 && n % 2 == 0);
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (m, &h) in DB4_LO.iter().enumerate() {
            let idx = (2 * k + m) % n;
            a += h * x[idx];
            // High-pass filter g[m] = (-1)^m h[L-1-m].
            let g = if m % 2 == 0 {
                DB4_LO[DB4_LO.len() - 1 - m]
            } else {
                -DB4_LO[DB4_LO.len() - 1 - m]
            };
            d += g * x[idx];
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

/// Full periodized multi-level DWT. `details[j]` is the level j+1 detail
/// vector, `approxs[j]` the level j+1 approximation.
pub struct DwtDecomposition {
    pub details: Vec<Vec<f64>>,
    pub approxs: Vec<Vec<f64>>,
}

pub fn dwt_periodized(x: &[f64], levels: usize) -> DwtDecomposition {
    assert!(
        x.len().is_power_of_two() && x.len() >= (1 << levels),
        "dwt input must be a power of two >= 2^levels"
    );
    let mut details = Vec::with_capacity(levels);
    let mut approxs = Vec::with_capacity(levels);
    let mut cur = x.to_vec();
    for _ in 0..levels {
        let (a, d) = dwt_step(&cur);
        details.push(d);
        approxs.push(a.clone());
        cur = a;
    }
    DwtDecomposition { details, approxs }
}

/// Resample the contour to its uniform frame grid with zero-order hold
/// across unvoiced gaps (leading gaps backfilled from the first voiced
/// frame), then zero-pad to the next power of two >= 1024.
pub fn contour_grid(contour: &F0Contour) -> Result<Vec<f64>> {
    if contour.n_voiced() == 0 {
        return Err(Error::Unvoiced);
    }
    let first_voiced = contour.f0.iter().copied().find(|&f| f > 0.0).unwrap();
    let mut grid = Vec::with_capacity(contour.f0.len());
    let mut held = first_voiced;
    for &f in &contour.f0 {
        if f > 0.0 {
            held = f;
        }
        grid.push(held);
    }
    let target = grid.len().next_power_of_two().max(MIN_GRID);
    grid.resize(target, 0.0);
    Ok(grid)
}

/// Seven statistics of a coefficient vector: energy, Shannon entropy
/// (-sum c^2 ln c^2), log-energy entropy (sum ln c^2, ln 0 := 0), TKEO mean,
/// TKEO std, max, min.
fn vector_stats(c: &[f64]) -> [f64; 7] {
    let energy: f64 = c.iter().map(|v| v * v).sum();
    let shannon: f64 = -c
        .iter()
        .map(|&v| {
            let e = v * v;
            if e > 0.0 {
                e * e.ln()
            } else {
                0.0
            }
        })
        .sum::<f64>();
    let log_energy: f64 = c
        .iter()
        .map(|&v| {
            let e = v * v;
            if e > 0.0 {
                e.ln()
            } else {
                0.0
            }
        })
        .sum();
    let t = dsp::tkeo(c);
    let max = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = c.iter().cloned().fold(f64::INFINITY, f64::min);
    [
        energy,
        shannon,
        log_energy,
        dsp::mean(&t),
        dsp::std_dev(&t),
        max,
        min,
    ]
}

/// The 182 wavelet measures: for each of {F0, log F0}, 7 statistics of the 10
/// detail vectors and the level 1-3 approximation vectors.
pub fn wavelet_family(contour: &F0Contour) -> Result<Vec<f64>> {
    let grid = contour_grid(contour)?;
    let log_grid: Vec<f64> = {
        // Log of the held contour, computed before zero padding would
        // otherwise produce -inf: padding zeros map to zero directly.
        let mut g: Vec<f64> = grid.iter().map(|&f| if f > 0.0 { f.ln() } else { 0.0 }).collect();
        debug_assert_eq!(g.len(), grid.len());
        g.shrink_to_fit();
        g
    };

    let mut out = Vec::with_capacity(182);
    for signal in [&grid, &log_grid] {
        let dec = dwt_periodized(signal, LEVELS);
        for d in &dec.details {
            out.extend(vector_stats(d));
        }
        for a in &dec.approxs[..3] {
            out.extend(vector_stats(a));
        }
    }
    debug_assert_eq!(out.len(), 182);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contour_from(f0: Vec<f64>) -> F0Contour {
        let n = f0.len();
        F0Contour {
            times: (0..n).map(|i| i as f64 * 0.01).collect(),
            f0,
            strength: vec![0.8; n],
            hop: 0.01,
        }
    }

    #[test]
    fn exactly_182_values() {
        let mut rng = crate::rng::rng_from_seed(2);
        let f0: Vec<f64> = (0..700)
            .map(|_| 140.0 + 3.0 * crate::rng::normal(&mut rng))
            .collect();
        let v = wavelet_family(&contour_from(f0)).unwrap();
        assert_eq!(v.len(), 182);
        assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn parseval_energy_conservation() {
        // Orthonormal periodized DWT: detail energies plus the deepest
        // approximation energy equal the signal energy.
        let mut rng = crate::rng::rng_from_seed(11);
        for _ in 0..5 {
            let x: Vec<f64> = (0..1024).map(|_| crate::rng::normal(&mut rng)).collect();
            let dec = dwt_periodized(&x, LEVELS);
            let total: f64 = dec
                .details
                .iter()
                .map(|d| d.iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                + dec.approxs[LEVELS - 1].iter().map(|v| v * v).sum::<f64>();
            let signal: f64 = x.iter().map(|v| v * v).sum();
            assert!(
                (total - signal).abs() / signal < 1e-9,
                "parseval: {total} vs {signal}"
            );
        }
    }

    #[test]
    fn impulse_parseval() {
        let mut x = vec![0.0; 1024];
        x[400] = 1.0;
        let dec = dwt_periodized(&x, LEVELS);
        let total: f64 = dec
            .details
            .iter()
            .map(|d| d.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            + dec.approxs[LEVELS - 1].iter().map(|v| v * v).sum::<f64>();
        assert!((total - 1.0).abs() < 1e-9, "impulse energy {total}");
    }

    #[test]
    fn constant_contour_zero_detail() {
        // A constant F0 grid without padding: every detail band is zero.
        let f0 = vec![128.0; 1024];
        let grid = contour_grid(&contour_from(f0)).unwrap();
        assert_eq!(grid.len(), 1024);
        let dec = dwt_periodized(&grid, LEVELS);
        for (j, d) in dec.details.iter().enumerate() {
            let e: f64 = d.iter().map(|v| v * v).sum();
            assert!(e < 1e-18, "detail {} energy {e}", j + 1);
        }
        // The approximation carries the scaled constant: at each level the
        // per-coefficient value grows by sqrt(2), preserving energy.
        let e0: f64 = 1024.0 * 128.0 * 128.0;
        for a in &dec.approxs {
            let e: f64 = a.iter().map(|v| v * v).sum();
            assert!((e - e0).abs() / e0 < 1e-12);
        }
    }

    #[test]
    fn unvoiced_contour_errors() {
        assert!(matches!(
            wavelet_family(&contour_from(vec![0.0; 100])),
            Err(Error::Unvoiced)
        ));
    }
}
