//! Timing of tree-ensemble attribution as the ensemble grows.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gig::{gig_attribute, GigConfig};
use crate::model::{Aggregation, Link, Model, Tree, TreeEnsemble};

/// `n_trees` stumps on random features with thresholds uniform in `[0, 1)`.
pub fn random_stump_ensemble(n_trees: usize, n_features: usize, seed: u64) -> Result<TreeEnsemble> {
    if n_trees == 0 || n_features == 0 {
        return Err(Error::InvalidInput("need at least one tree and one feature".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees = (0..n_trees)
        .map(|_| {
            let f = rng.gen_range(0..n_features);
            Tree::stump(f, rng.gen(), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    TreeEnsemble::new(trees, n_features, Link::Identity, Aggregation::Sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n_trees: usize,
    pub n_attributions: usize,
    /// Fastest of the timed repeats.
    pub seconds: f64,
    pub per_second: f64,
}

/// Times GIG attribution of `n_pairs` random point pairs in `[0, 1)^n` for
/// each ensemble size, single-threaded, keeping the best of `repeats` runs.
pub fn time_gig_scaling(
    tree_counts: &[usize],
    n_features: usize,
    n_pairs: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<ScalingRow>> {
    if n_pairs == 0 || repeats == 0 {
        return Err(Error::InvalidInput("n_pairs and repeats must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n_pairs)
        .map(|_| {
            let a = (0..n_features).map(|_| rng.gen()).collect();
            let b = (0..n_features).map(|_| rng.gen()).collect();
            (a, b)
        })
        .collect();
    let cfg = GigConfig::default();
    tree_counts
        .iter()
        .map(|&n_trees| {
            let model = Model::Trees(random_stump_ensemble(n_trees, n_features, seed ^ n_trees as u64)?);
            let mut best = f64::INFINITY;
            for _ in 0..repeats {
                let start = Instant::now();
                for (a, b) in &pairs {
                    std::hint::black_box(gig_attribute(&model, a, b, &cfg)?);
                }
                best = best.min(start.elapsed().as_secs_f64());
            }
            Ok(ScalingRow {
                n_trees,
                n_attributions: n_pairs,
                seconds: best,
                per_second: n_pairs as f64 / best,
            })
        })
        .collect()
}

/// `(t_big / t_small) / (n_big / n_small)`: 1 for exactly linear growth.
pub fn normalized_growth(small: &ScalingRow, big: &ScalingRow) -> f64 {
    (big.seconds / small.seconds) / (big.n_trees as f64 / small.n_trees as f64)
}
