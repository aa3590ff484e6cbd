//! Glottis quotient: summary statistics of estimated vocal-fold cycle
//! durations. The above/below-median splits act as open/closed-phase proxies.

use crate::dsp;
use crate::error::{Error, Result};
use crate::pitch::CycleSequence;

pub fn gq(cycles: &CycleSequence) -> Result<Vec<f64>> {
    let d = &cycles.periods;
    if d.len() < 3 {
        return Err(Error::InsufficientCycles {
            found: d.len(),
            needed: 3,
        });
    }
    let mut sorted = d.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = dsp::percentile_sorted(&sorted, 50.0);
    let range = (dsp::percentile_sorted(&sorted, 95.0) - dsp::percentile_sorted(&sorted, 5.0))
        / med.max(1e-300);
    let above: Vec<f64> = d.iter().copied().filter(|&v| v > med).collect();
    let below: Vec<f64> = d.iter().copied().filter(|&v| v < med).collect();
    Ok(vec![range, dsp::std_dev(&above), dsp::std_dev(&below)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycles_from(periods: Vec<f64>) -> CycleSequence {
        let n = periods.len();
        CycleSequence {
            periods,
            amplitudes: vec![1.0; n],
            marks: Vec::new(),
        }
    }

    #[test]
    fn constant_cycles_zero() {
        let v = gq(&cycles_from(vec![0.01; 40])).unwrap();
        assert!(v.iter().all(|&x| x.abs() < 1e-12), "{v:?}");
    }

    #[test]
    fn bimodal_range_is_point_two() {
        // Alternating 9 ms / 11 ms: prc5 = 9, prc95 = 11, median = 10.
        let d: Vec<f64> = (0..40)
            .map(|i| if i % 2 == 0 { 9e-3 } else { 11e-3 })
            .collect();
        let v = gq(&cycles_from(d)).unwrap();
        assert!((v[0] - 0.2).abs() < 1e-9, "range {}", v[0]);
        // Each half is constant, so the phase-proxy stds vanish.
        assert!(v[1].abs() < 1e-12 && v[2].abs() < 1e-12);
    }

    #[test]
    fn gq_range_monotone_in_jitter() {
        let mut measured = Vec::new();
        for (k, &s) in [0.5, 1.0, 2.0, 4.0].iter().enumerate() {
            let mut rng = crate::rng::rng_from_seed(42 + k as u64);
            let d: Vec<f64> = (0..400)
                .map(|_| 0.01 * (1.0 + s / 100.0 * crate::rng::normal(&mut rng)))
                .collect();
            measured.push(gq(&cycles_from(d)).unwrap()[0]);
        }
        assert!(measured.windows(2).all(|w| w[1] > w[0]), "{measured:?}");
    }

    #[test]
    fn too_few_cycles() {
        assert!(matches!(
            gq(&cycles_from(vec![0.01, 0.01])),
            Err(Error::InsufficientCycles { .. })
        ));
    }
}
