//! Feature selection: four rankers (mRMR, GSO, RELIEF, LASSO), their Borda
//! ensemble, and the balance/split/select tally protocol.

pub mod gso;
pub mod lasso;
pub mod mi;
pub mod mrmr;
pub mod relief;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

pub use gso::gso_rank;
pub use lasso::lasso_rank;
pub use mrmr::mrmr_rank;
pub use relief::relief_rank;

/// Ranking algorithm identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Algorithm {
    Mrmr,
    Gso,
    Relief,
    Lasso,
    Ensemble,
}

impl Algorithm {
    pub const RANKERS: [Algorithm; 4] = [
        Algorithm::Mrmr,
        Algorithm::Gso,
        Algorithm::Relief,
        Algorithm::Lasso,
    ];

    pub const ALL: [Algorithm; 5] = [
        Algorithm::Mrmr,
        Algorithm::Gso,
        Algorithm::Relief,
        Algorithm::Lasso,
        Algorithm::Ensemble,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Mrmr => "mrmr",
            Algorithm::Gso => "gso",
            Algorithm::Relief => "relief",
            Algorithm::Lasso => "lasso",
            Algorithm::Ensemble => "ensemble",
        }
    }

    pub fn parse(s: &str) -> Result<Algorithm> {
        match s.to_ascii_lowercase().as_str() {
            "mrmr" => Ok(Algorithm::Mrmr),
            "gso" => Ok(Algorithm::Gso),
            "relief" => Ok(Algorithm::Relief),
            "lasso" => Ok(Algorithm::Lasso),
            "ensemble" => Ok(Algorithm::Ensemble),
            other => Err(Error::InvalidInput(format!("unknown algorithm {other:?}"))),
        }
    }

    /// Run this ranker (not valid for `Ensemble`).
    pub fn rank(&self, columns: &[Vec<f64>], y: &[u8], k: usize) -> Result<RankedFeatures> {
        match self {
            Algorithm::Mrmr => mrmr_rank(columns, y, k),
            Algorithm::Gso => gso_rank(columns, y, k),
            Algorithm::Relief => relief_rank(columns, y, k),
            Algorithm::Lasso => lasso_rank(columns, y, k),
            Algorithm::Ensemble => Err(Error::InvalidInput(
                "ensemble is derived from the four rankers".into(),
            )),
        }
    }
}

/// Ordered feature indices, best first, with per-feature scores.
#[derive(Debug, Clone)]
pub struct RankedFeatures {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
    pub algorithm: Algorithm,
}

impl RankedFeatures {
    /// Validate that the ranking is duplicate-free.
    pub fn check(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &j in &self.order {
            if !seen.insert(j) {
                return Err(Error::InvalidInput(format!("duplicate feature {j}")));
            }
        }
        Ok(())
    }
}

/// Borda-count ensemble: composite score of feature f is the sum over
/// rankings of (M - rank_f). Ties break by the best single-algorithm rank,
/// then by the lowest feature index. All rankings must be full permutations
/// of the same feature set; arity is free.
pub fn ensemble_rank(rankings: &[RankedFeatures]) -> Result<RankedFeatures> {
    if rankings.is_empty() {
        return Err(Error::InvalidInput("ensemble of zero rankings".into()));
    }
    let m = rankings[0].order.len();
    for r in rankings {
        r.check()?;
        if r.order.len() != m {
            return Err(Error::InvalidInput(
                "rankings cover different feature sets".into(),
            ));
        }
    }
    let mut borda = vec![0usize; m];
    let mut best_rank = vec![usize::MAX; m];
    for r in rankings {
        for (rank0, &f) in r.order.iter().enumerate() {
            if f >= m {
                return Err(Error::InvalidInput(format!("feature {f} out of range")));
            }
            borda[f] += m - (rank0 + 1);
            best_rank[f] = best_rank[f].min(rank0 + 1);
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        borda[b]
            .cmp(&borda[a])
            .then(best_rank[a].cmp(&best_rank[b]))
            .then(a.cmp(&b))
    });
    let scores = order.iter().map(|&f| borda[f] as f64).collect();
    Ok(RankedFeatures {
        order,
        scores,
        algorithm: Algorithm::Ensemble,
    })
}

/// Appearance counts of each feature in the per-iteration top-k lists.
#[derive(Debug, Clone)]
pub struct SelectionTally {
    pub counts: Vec<u32>,
    pub iterations: u32,
    pub algorithm: Algorithm,
}

impl SelectionTally {
    /// Features by descending count; ties to the lowest index.
    pub fn ranking(&self) -> RankedFeatures {
        let mut order: Vec<usize> = (0..self.counts.len()).collect();
        order.sort_by(|&a, &b| self.counts[b].cmp(&self.counts[a]).then(a.cmp(&b)));
        let scores = order.iter().map(|&f| self.counts[f] as f64).collect();
        RankedFeatures {
            order,
            scores,
            algorithm: self.algorithm,
        }
    }
}

/// Configuration of the balance/split/select protocol.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolConfig {
    pub reps: usize,
    pub folds: usize,
    /// Top-k membership recorded per iteration.
    pub top_k: usize,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            reps: 10,
            folds: 10,
            top_k: 100,
            seed: 0,
        }
    }
}

/// Result of the selection protocol: one tally per ranker plus the ensemble.
pub struct ProtocolResult {
    pub tallies: Vec<SelectionTally>,
}

impl ProtocolResult {
    pub fn tally(&self, alg: Algorithm) -> &SelectionTally {
        self.tallies.iter().find(|t| t.algorithm == alg).unwrap()
    }
}

/// The balance/split/select protocol: per repetition, undersample the
/// majority class to balance, assign stratified folds, and per fold run all
/// four rankers (plus their ensemble) on the training portion, tallying
/// top-k membership over the reps x folds iterations.
pub fn selection_protocol(
    columns: &[Vec<f64>],
    y: &[u8],
    cfg: &ProtocolConfig,
) -> Result<ProtocolResult> {
    let m = columns.len();
    let n_minority = y
        .iter()
        .filter(|&&v| v == 1)
        .count()
        .min(y.iter().filter(|&&v| v == 0).count());
    if n_minority < 20 {
        return Err(Error::Protocol(format!(
            "minority class has {n_minority} rows; need at least 20 to form folds"
        )));
    }
    let top_k = cfg.top_k.min(m);

    // Per-repetition balanced subsets and fold assignments, precomputed
    // sequentially for determinism, then iterated in parallel.
    struct Iteration {
        train_rows: Vec<usize>,
    }
    let mut iterations = Vec::with_capacity(cfg.reps * cfg.folds);
    for rep in 0..cfg.reps {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, rep as u64));
        let balanced = balance_indices(y, &mut rng);
        // Stratified fold assignment on the balanced set.
        let mut fold_of = vec![0usize; balanced.len()];
        for class in [0u8, 1u8] {
            let mut members: Vec<usize> = (0..balanced.len())
                .filter(|&i| y[balanced[i]] == class)
                .collect();
            members.shuffle(&mut rng);
            for (pos, &i) in members.iter().enumerate() {
                fold_of[i] = pos % cfg.folds;
            }
        }
        for fold in 0..cfg.folds {
            let train_rows: Vec<usize> = (0..balanced.len())
                .filter(|&i| fold_of[i] != fold)
                .map(|i| balanced[i])
                .collect();
            iterations.push(Iteration { train_rows });
        }
    }

    let per_iteration: Vec<Result<Vec<Vec<usize>>>> = iterations
        .par_iter()
        .map(|it| {
            let sub_cols: Vec<Vec<f64>> = columns
                .iter()
                .map(|c| it.train_rows.iter().map(|&r| c[r]).collect())
                .collect();
            let sub_y: Vec<u8> = it.train_rows.iter().map(|&r| y[r]).collect();
            let mut rankings = Vec::with_capacity(4);
            for alg in Algorithm::RANKERS {
                rankings.push(alg.rank(&sub_cols, &sub_y, m)?);
            }
            let ens = ensemble_rank(&rankings)?;
            let mut tops: Vec<Vec<usize>> = rankings
                .iter()
                .map(|r| r.order[..top_k].to_vec())
                .collect();
            tops.push(ens.order[..top_k].to_vec());
            Ok(tops)
        })
        .collect();

    let mut tallies: Vec<SelectionTally> = Algorithm::ALL
        .iter()
        .map(|&algorithm| SelectionTally {
            counts: vec![0; m],
            iterations: (cfg.reps * cfg.folds) as u32,
            algorithm,
        })
        .collect();
    for r in per_iteration {
        let tops = r?;
        for (t, top) in tallies.iter_mut().zip(tops) {
            for f in top {
                t.counts[f] += 1;
            }
        }
    }
    Ok(ProtocolResult { tallies })
}

/// Uniform undersampling of the majority class; returns sorted row indices
/// with both classes at the minority size.
pub fn balance_indices(y: &[u8], rng: &mut impl rand::Rng) -> Vec<usize> {
    let pd: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 1).collect();
    let hc: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 0).collect();
    let (mut majority, minority) = if pd.len() > hc.len() { (pd.clone(), hc) } else { (hc, pd) };
    majority.shuffle(rng);
    majority.truncate(minority.len());
    let mut out = minority;
    out.extend(majority);
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_unanimous_first() {
        let mk = |order: Vec<usize>, alg| RankedFeatures {
            scores: vec![0.0; order.len()],
            order,
            algorithm: alg,
        };
        let rankings = vec![
            mk(vec![2, 0, 1], Algorithm::Mrmr),
            mk(vec![2, 1, 0], Algorithm::Gso),
            mk(vec![2, 0, 1], Algorithm::Relief),
            mk(vec![2, 1, 0], Algorithm::Lasso),
        ];
        let e = ensemble_rank(&rankings).unwrap();
        assert_eq!(e.order[0], 2);
    }

    #[test]
    fn ensemble_borda_hand_oracle() {
        // Orderings over features {0,1,2} (best first, 1-based ids in the
        // hand computation): A: 0>1>2, B: 0>2>1, C: 1>0>2, D: 2>0>1.
        // Borda (M - rank): f0 = 2+2+1+1 = 6, f1 = 1+0+2+0 = 3,
        // f2 = 0+1+0+2 = 3. f1/f2 tie on score and on best rank (both have a
        // first place... f1 best rank 1 via C, f2 best rank 1 via D), so the
        // lowest index wins: composite order is [0, 1, 2].
        let mk = |order: Vec<usize>, alg| RankedFeatures {
            scores: vec![0.0; order.len()],
            order,
            algorithm: alg,
        };
        let rankings = vec![
            mk(vec![0, 1, 2], Algorithm::Mrmr),
            mk(vec![0, 2, 1], Algorithm::Gso),
            mk(vec![1, 0, 2], Algorithm::Relief),
            mk(vec![2, 0, 1], Algorithm::Lasso),
        ];
        let e = ensemble_rank(&rankings).unwrap();
        assert_eq!(e.order, vec![0, 1, 2]);
        assert_eq!(e.scores, vec![6.0, 3.0, 3.0]);
    }

    #[test]
    fn ensemble_symmetric_under_algorithm_order() {
        let mk = |order: Vec<usize>, alg| RankedFeatures {
            scores: vec![0.0; order.len()],
            order,
            algorithm: alg,
        };
        let a = vec![
            mk(vec![0, 1, 2, 3], Algorithm::Mrmr),
            mk(vec![3, 2, 1, 0], Algorithm::Gso),
            mk(vec![1, 3, 0, 2], Algorithm::Relief),
            mk(vec![2, 0, 3, 1], Algorithm::Lasso),
        ];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(ensemble_rank(&a).unwrap().order, ensemble_rank(&b).unwrap().order);
    }

    #[test]
    fn ensemble_arity_three_works() {
        let mk = |order: Vec<usize>, alg| RankedFeatures {
            scores: vec![0.0; order.len()],
            order,
            algorithm: alg,
        };
        let rankings = vec![
            mk(vec![0, 1, 2], Algorithm::Mrmr),
            mk(vec![1, 0, 2], Algorithm::Gso),
            mk(vec![0, 2, 1], Algorithm::Relief),
        ];
        let e = ensemble_rank(&rankings).unwrap();
        assert_eq!(e.order[0], 0);
    }

    #[test]
    fn ensemble_rejects_mismatched_sets() {
        let mk = |order: Vec<usize>, alg| RankedFeatures {
            scores: vec![0.0; order.len()],
            order,
            algorithm: alg,
        };
        let rankings = vec![
            mk(vec![0, 1, 2], Algorithm::Mrmr),
            mk(vec![0, 1], Algorithm::Gso),
        ];
        assert!(ensemble_rank(&rankings).is_err());
    }

    #[test]
    fn balance_equalizes_classes() {
        let y: Vec<u8> = (0..100).map(|i| if i < 30 { 1 } else { 0 }).collect();
        let mut rng = rng_from_seed(5);
        let idx = balance_indices(&y, &mut rng);
        assert_eq!(idx.len(), 60);
        let pd = idx.iter().filter(|&&i| y[i] == 1).count();
        assert_eq!(pd, 30);
        // Already balanced input: unchanged up to permutation.
        let yb: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        let idx2 = balance_indices(&yb, &mut rng);
        assert_eq!(idx2, (0..40).collect::<Vec<_>>());
    }

    #[test]
    fn balance_same_seed_same_subset() {
        let y: Vec<u8> = (0..200).map(|i| if i < 60 { 1 } else { 0 }).collect();
        let a = balance_indices(&y, &mut rng_from_seed(9));
        let b = balance_indices(&y, &mut rng_from_seed(9));
        assert_eq!(a, b);
    }

    fn planted_matrix(
        n: usize,
        m: usize,
        planted: &[usize],
        seed: u64,
    ) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = rng_from_seed(seed);
        let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                let w = if planted.contains(&j) { 1.0 } else { 0.0 };
                y.iter()
                    .map(|&v| w * v as f64 + crate::rng::normal(&mut rng))
                    .collect()
            })
            .collect();
        (cols, y)
    }

    #[test]
    fn protocol_recovers_planted_features() {
        let planted = [3usize, 17, 41, 68, 90];
        let (cols, y) = planted_matrix(400, 100, &planted, 12);
        let cfg = ProtocolConfig {
            top_k: 10,
            seed: 3,
            ..Default::default()
        };
        let result = selection_protocol(&cols, &y, &cfg).unwrap();
        for alg in Algorithm::ALL {
            let tally = result.tally(alg);
            assert_eq!(tally.iterations, 100);
            assert!(tally.counts.iter().all(|&c| c <= 100));
            let ranking = tally.ranking();
            let top10: std::collections::HashSet<usize> =
                ranking.order[..10].iter().copied().collect();
            let hits = planted.iter().filter(|f| top10.contains(f)).count();
            assert!(
                hits >= 4,
                "{:?}: only {hits}/5 planted in top 10 (top: {:?})",
                alg,
                &ranking.order[..10]
            );
        }
    }

    #[test]
    fn protocol_reproducible() {
        let planted = [1usize, 5];
        let (cols, y) = planted_matrix(120, 12, &planted, 3);
        let cfg = ProtocolConfig {
            reps: 3,
            folds: 5,
            top_k: 4,
            seed: 21,
        };
        let a = selection_protocol(&cols, &y, &cfg).unwrap();
        let b = selection_protocol(&cols, &y, &cfg).unwrap();
        for (ta, tb) in a.tallies.iter().zip(&b.tallies) {
            assert_eq!(ta.counts, tb.counts);
        }
    }

    #[test]
    fn protocol_needs_twenty_minority_rows() {
        let (cols, _) = planted_matrix(100, 5, &[0], 4);
        let y: Vec<u8> = (0..100).map(|i| if i < 10 { 1 } else { 0 }).collect();
        assert!(matches!(
            selection_protocol(&cols, &y, &ProtocolConfig::default()),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn rankers_invariant_to_row_order() {
        let (cols, y) = planted_matrix(80, 6, &[2], 8);
        let perm: Vec<usize> = {
            let mut p: Vec<usize> = (0..80).collect();
            p.shuffle(&mut rng_from_seed(1));
            p
        };
        let cols_p: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| perm.iter().map(|&i| c[i]).collect())
            .collect();
        let y_p: Vec<u8> = perm.iter().map(|&i| y[i]).collect();
        for alg in Algorithm::RANKERS {
            let a = alg.rank(&cols, &y, 6).unwrap();
            let b = alg.rank(&cols_p, &y_p, 6).unwrap();
            assert_eq!(a.order, b.order, "{alg:?} is row-order sensitive");
        }
    }

    #[test]
    fn scaling_invariances() {
        let (cols, y) = planted_matrix(100, 6, &[1, 4], 9);
        // Per-feature affine rescaling: GSO, LASSO, RELIEF invariant.
        let cols_scaled: Vec<Vec<f64>> = cols
            .iter()
            .enumerate()
            .map(|(j, c)| c.iter().map(|&v| v * (j as f64 + 2.0) - 3.0).collect())
            .collect();
        for alg in [Algorithm::Gso, Algorithm::Lasso, Algorithm::Relief] {
            let a = alg.rank(&cols, &y, 6).unwrap();
            let b = alg.rank(&cols_scaled, &y, 6).unwrap();
            assert_eq!(a.order, b.order, "{alg:?} not affine-invariant");
        }
        // Strictly monotone transform: mRMR invariant.
        let cols_mono: Vec<Vec<f64>> = cols
            .iter()
            .map(|c| c.iter().map(|&v| (0.5 * v).exp()).collect())
            .collect();
        let a = mrmr_rank(&cols, &y, 6).unwrap();
        let b = mrmr_rank(&cols_mono, &y, 6).unwrap();
        assert_eq!(a.order, b.order, "mRMR not monotone-invariant");
    }
}
