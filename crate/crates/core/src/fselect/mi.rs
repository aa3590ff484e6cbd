//! Mutual information on equal-frequency discretized features.

pub const N_BINS: usize = 10;

/// Equal-frequency binning by rank: ties keep their input order, so any
/// strictly monotone transform of the column yields identical bins.
pub fn equal_frequency_bins(x: &[f64], n_bins: usize) -> Vec<usize> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap().then(a.cmp(&b)));
    let mut bins = vec![0usize; n];
    for (rank, &i) in order.iter().enumerate() {
        bins[i] = (rank * n_bins / n).min(n_bins - 1);
    }
    bins
}

/// Mutual information in nats between two discrete sequences.
pub fn mi_discrete(a: &[usize], b: &[usize], a_card: usize, b_card: usize) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut joint = vec![0f64; a_card * b_card];
    let mut pa = vec![0f64; a_card];
    let mut pb = vec![0f64; b_card];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * b_card + y] += 1.0;
        pa[x] += 1.0;
        pb[y] += 1.0;
    }
    let mut mi = 0.0;
    for x in 0..a_card {
        for y in 0..b_card {
            let j = joint[x * b_card + y];
            if j > 0.0 {
                mi += j / n * ((j * n) / (pa[x] * pb[y])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// MI between a continuous feature (equal-frequency binned) and binary labels.
pub fn mi_feature_label(x: &[f64], y: &[u8]) -> f64 {
    let bins = equal_frequency_bins(x, N_BINS);
    let yb: Vec<usize> = y.iter().map(|&v| v as usize).collect();
    mi_discrete(&bins, &yb, N_BINS, 2)
}

/// MI between two continuous features.
pub fn mi_feature_feature(a: &[f64], b: &[f64]) -> f64 {
    let ba = equal_frequency_bins(a, N_BINS);
    let bb = equal_frequency_bins(b, N_BINS);
    mi_discrete(&ba, &bb, N_BINS, N_BINS)
}

/// Entropy of a binary label vector, in nats.
pub fn label_entropy(y: &[u8]) -> f64 {
    let n = y.len() as f64;
    let p1 = y.iter().filter(|&&v| v == 1).count() as f64 / n;
    let p0 = 1.0 - p1;
    let mut h = 0.0;
    if p0 > 0.0 {
        h -= p0 * p0.ln();
    }
    if p1 > 0.0 {
        h -= p1 * p1.ln();
    }
    h
}
