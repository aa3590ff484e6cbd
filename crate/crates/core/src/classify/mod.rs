//! Classifiers: the Random Forest primary mapper, a Gaussian Naive Bayes
//! baseline, and a fair-coin random baseline.

pub mod bayes;
pub mod forest;
pub mod tree;

use rand::Rng;

use crate::rng::rng_from_seed;

pub use bayes::{nb_predict, nb_train, NaiveBayesModel};
pub use forest::{rf_predict, rf_train, ForestConfig, ForestModel, Prediction};

/// Fair-coin class assignments (0 = HC, 1 = PD), reproducible per seed.
pub fn random_classifier(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { 0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coin_is_fair() {
        let v = random_classifier(10_000, 3);
        let pd = v.iter().filter(|&&c| c == 1).count() as f64 / v.len() as f64;
        assert!((pd - 0.5).abs() <= 0.02, "PD fraction {pd}");
    }

    #[test]
    fn coin_reproducible() {
        assert_eq!(random_classifier(100, 9), random_classifier(100, 9));
        assert_ne!(random_classifier(100, 9), random_classifier(100, 10));
    }
}
