#![allow(dead_code)]

use pathattr::model::{Aggregation, AnalyticModel, Link, Polynomial, Tree, TreeEnsemble, LEAF};
use rand::Rng;

/// Random tree grown to at most `max_depth`, thresholds in `[0, 1)`.
pub fn random_tree(rng: &mut impl Rng, n_features: usize, max_depth: usize) -> Tree {
    let mut t = (vec![], vec![], vec![], vec![], vec![]);
    fn grow(
        rng: &mut impl Rng,
        t: &mut (Vec<usize>, Vec<f64>, Vec<f64>, Vec<i32>, Vec<i32>),
        n: usize,
        depth: usize,
    ) -> i32 {
        let id = t.0.len();
        t.0.push(0);
        t.1.push(0.0);
        t.2.push(rng.gen_range(-1.0..1.0));
        t.3.push(LEAF);
        t.4.push(LEAF);
        if depth > 0 && (id == 0 || rng.gen_bool(0.75)) {
            t.0[id] = rng.gen_range(0..n);
            t.1[id] = rng.gen();
            let l = grow(rng, t, n, depth - 1);
            let r = grow(rng, t, n, depth - 1);
            t.3[id] = l;
            t.4[id] = r;
        }
        id as i32
    }
    grow(rng, &mut t, n_features, max_depth);
    Tree::new(t.0, t.1, t.2, t.3, t.4).unwrap()
}

pub fn random_stumps(rng: &mut impl Rng, n_trees: usize, n_features: usize, used: usize) -> TreeEnsemble {
    let trees = (0..n_trees)
        .map(|_| {
            Tree::stump(
                rng.gen_range(0..used),
                rng.gen(),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    TreeEnsemble::new(trees, n_features, Link::Identity, Aggregation::Sum).unwrap()
}

pub fn random_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-0.25..1.25)).collect()
}

pub fn random_polynomial(rng: &mut impl Rng) -> Polynomial {
    let degree = rng.gen_range(0..=5);
    Polynomial::new(rng.gen_range(-0.5..0.5), (0..=degree).map(|_| rng.gen_range(-2.0..2.0)).collect())
}

pub fn random_separable(rng: &mut impl Rng, n: usize) -> AnalyticModel {
    AnalyticModel::separable((0..n).map(|_| random_polynomial(rng)).collect()).unwrap()
}

pub fn random_bilinear(rng: &mut impl Rng, n: usize) -> AnalyticModel {
    AnalyticModel::bilinear((0..n).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect()).unwrap()
}

/// Plain power-sum evaluation of a polynomial about its origin.
pub fn poly_direct(origin: f64, coefficients: &[f64], x: f64) -> f64 {
    coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| c * (x - origin).powi(k as i32))
        .sum()
}

/// Same structure with every threshold at 0.5, for {0,1}-valued features.
pub fn binary_tree(rng: &mut impl Rng, n_features: usize, max_depth: usize) -> Tree {
    let t = random_tree(rng, n_features, max_depth);
    let nodes = 0..t.len();
    let child = |i: usize, v: f64| if t.is_leaf(i) { LEAF } else { t.route(i, v) as i32 };
    Tree::new(
        nodes.clone().map(|i| t.feature(i)).collect(),
        vec![0.5; t.len()],
        nodes.clone().map(|i| t.value(i)).collect(),
        nodes.clone().map(|i| child(i, f64::NEG_INFINITY)).collect(),
        nodes.map(|i| child(i, f64::INFINITY)).collect(),
    )
    .unwrap()
}
