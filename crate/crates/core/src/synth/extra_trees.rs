use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::data::LabeledSample;
use super::derive_seed;
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::model::{Aggregation, Link, Tree, TreeEnsemble, LEAF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainerConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features considered per node; `None` means all. Defaults to
    /// `floor(sqrt(2)) = 1`, the usual extra-trees classifier setting.
    pub n_candidate_features: Option<usize>,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            n_candidate_features: Some(1),
            seed: 0,
            execution: Execution::default(),
        }
    }
}

const N_FEATURES: usize = 2;

/// Extremely randomized trees classifier. Each node draws one uniform
/// threshold per candidate feature within the node's range and keeps the
/// lowest weighted Gini impurity. Leaves hold the class-2 fraction; the
/// ensemble averages them, so scores are probabilities.
///
/// Single-class data yields a constant ensemble (score 1 for class 2,
/// 0 for class 1).
pub fn train_extra_trees(data: &[LabeledSample], cfg: &TrainerConfig) -> Result<TreeEnsemble> {
    if cfg.n_trees == 0 {
        return Err(Error::InvalidInput("n_trees must be at least 1".into()));
    }
    if cfg.n_candidate_features == Some(0) {
        return Err(Error::InvalidInput("n_candidate_features must be at least 1".into()));
    }
    if data.is_empty() || data.len() < cfg.min_samples_split {
        return Err(Error::InvalidInput(format!(
            "{} samples, need at least max(1, min_samples_split = {})",
            data.len(),
            cfg.min_samples_split
        )));
    }
    if let Some(s) = data.iter().find(|s| s.label != 1 && s.label != 2) {
        return Err(Error::InvalidInput(format!("label {} is not 1 or 2", s.label)));
    }
    if data.iter().any(|s| s.x.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    let n2 = data.iter().filter(|s| s.label == 2).count();
    if n2 == 0 || n2 == data.len() {
        let p = if n2 == 0 { 0.0 } else { 1.0 };
        return TreeEnsemble::new(vec![Tree::constant(p)], N_FEATURES, Link::Identity, Aggregation::Mean);
    }
    let trees = map_range(cfg.execution, cfg.n_trees, |t| {
        let mut b = Builder {
            data,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, t as u64)),
            feature: Vec::new(),
            threshold: Vec::new(),
            value: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
        };
        let mut idx: Vec<usize> = (0..data.len()).collect();
        b.grow(&mut idx, 0);
        Tree::new(b.feature, b.threshold, b.value, b.left, b.right)
    });
    let trees = trees.into_iter().collect::<Result<Vec<_>>>()?;
    TreeEnsemble::new(trees, N_FEATURES, Link::Identity, Aggregation::Mean)
}

struct Builder<'a> {
    data: &'a [LabeledSample],
    cfg: &'a TrainerConfig,
    rng: ChaCha8Rng,
    feature: Vec<usize>,
    threshold: Vec<f64>,
    value: Vec<f64>,
    left: Vec<i32>,
    right: Vec<i32>,
}

fn gini(n2: usize, n: usize) -> f64 {
    let p = n2 as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl Builder<'_> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> i32 {
        let id = self.value.len();
        let n = idx.len();
        let n2 = idx.iter().filter(|&&i| self.data[i].label == 2).count();
        self.feature.push(0);
        self.threshold.push(0.0);
        self.value.push(n2 as f64 / n as f64);
        self.left.push(LEAF);
        self.right.push(LEAF);

        let splittable = n >= self.cfg.min_samples_split.max(2)
            && n2 > 0
            && n2 < n
            && self.cfg.max_depth.map_or(true, |d| depth < d);
        if !splittable {
            return id as i32;
        }
        let mut candidates: Vec<usize> = (0..N_FEATURES).collect();
        if let Some(k) = self.cfg.n_candidate_features.filter(|&k| k < N_FEATURES) {
            candidates.partial_shuffle(&mut self.rng, k);
            candidates.truncate(k);
        }
        let mut best: Option<(f64, usize, f64)> = None;
        for f in candidates {
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.data[i].x[f];
                (lo.min(v), hi.max(v))
            });
            if !(lo < hi) {
                continue;
            }
            let mut t = self.rng.gen_range(lo..hi);
            if t <= lo {
                t = 0.5 * (lo + hi);
            }
            let (mut nl, mut nl2) = (0, 0);
            for &i in idx.iter() {
                if self.data[i].x[f] < t {
                    nl += 1;
                    nl2 += usize::from(self.data[i].label == 2);
                }
            }
            let (nr, nr2) = (n - nl, n2 - nl2);
            let impurity = (nl as f64 * gini(nl2, nl) + nr as f64 * gini(nr2, nr)) / n as f64;
            if best.map_or(true, |(b, _, _)| impurity < b) {
                best = Some((impurity, f, t));
            }
        }
        let Some((_, f, t)) = best else {
            return id as i32;
        };
        idx.sort_by_key(|&i| self.data[i].x[f] >= t);
        let split = idx.partition_point(|&i| self.data[i].x[f] < t);
        let (lo_idx, hi_idx) = idx.split_at_mut(split);
        self.feature[id] = f;
        self.threshold[id] = t;
        let l = self.grow(lo_idx, depth + 1);
        let r = self.grow(hi_idx, depth + 1);
        self.left[id] = l;
        self.right[id] = r;
        id as i32
    }
}
