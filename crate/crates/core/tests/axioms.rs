mod common;

use std::sync::Arc;

use pathattr::gig::{gig_attribute, GigConfig};
use pathattr::model::{Aggregation, AnalyticModel, Link, Model, Tree, TreeEnsemble};
use pathattr::shapley::{shapley_exact, shapley_permutation};
use pathattr::transform::{transform_feature, Affine, Cube, Exp};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_bilinear, random_point, random_separable, random_stumps, random_tree};

/// Every leaf value multiplied by `c`.
fn scaled(e: &TreeEnsemble, c: f64) -> Vec<Tree> {
    e.trees()
        .iter()
        .map(|t| {
            let nodes = 0..t.len();
            let child = |i: usize, v: f64| if t.is_leaf(i) { -1 } else { t.route(i, v) as i32 };
            Tree::new(
                nodes.clone().map(|i| t.feature(i)).collect(),
                nodes.clone().map(|i| t.threshold(i)).collect(),
                nodes.clone().map(|i| c * t.value(i)).collect(),
                nodes.clone().map(|i| child(i, f64::NEG_INFINITY)).collect(),
                nodes.map(|i| child(i, f64::INFINITY)).collect(),
            )
            .unwrap()
        })
        .collect()
}

/// Stump ensemble on two features with the features swapped.
fn mirrored(e: &TreeEnsemble) -> TreeEnsemble {
    let trees = e
        .trees()
        .iter()
        .map(|t| Tree::stump(1 - t.feature(0), t.threshold(0), t.value(1), t.value(2)))
        .collect();
    TreeEnsemble::new(trees, 2, e.link(), e.aggregation()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn efficiency_and_dummy_on_stumps(seed in any::<u64>(), n in 1usize..=6, n_trees in 1usize..=50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let used = rng.gen_range(1..=n);
        let e = random_stumps(&mut rng, n_trees, n, used);
        let m = Model::Trees(e);
        let a = random_point(&mut rng, n);
        let b = random_point(&mut rng, n);
        let g = gig_attribute(&m, &a, &b, &GigConfig::default()).unwrap();
        let s = shapley_exact(&m, &a, &b).unwrap();
        prop_assert!(g.efficiency_residual.abs() < 1e-9);
        prop_assert!(s.efficiency_residual.abs() < 1e-9);
        for f in used..n {
            prop_assert_eq!(g.phi[f], 0.0);
            prop_assert_eq!(s.phi[f], 0.0);
        }
    }

    #[test]
    fn gig_is_linear_in_the_model(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let f = random_stumps(&mut rng, 10, n, n);
        let g = random_stumps(&mut rng, 10, n, n);
        let mut trees = scaled(&f, alpha);
        trees.extend(scaled(&g, beta));
        let combined = Model::Trees(TreeEnsemble::new(trees, n, Link::Identity, Aggregation::Sum).unwrap());
        let a = random_point(&mut rng, n);
        let b = random_point(&mut rng, n);
        let cfg = GigConfig::default();
        let pf = gig_attribute(&Model::Trees(f), &a, &b, &cfg).unwrap().phi;
        let pg = gig_attribute(&Model::Trees(g), &a, &b, &cfg).unwrap().phi;
        let pc = gig_attribute(&combined, &a, &b, &cfg).unwrap().phi;
        for i in 0..n {
            prop_assert!((pc[i] - (alpha * pf[i] + beta * pg[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn mirrored_models_swap_credit(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_stumps(&mut rng, 20, 2, 2);
        let m = mirrored(&e);
        let a = random_point(&mut rng, 2);
        let b = random_point(&mut rng, 2);
        let (sa, sb) = ([a[1], a[0]], [b[1], b[0]]);
        let cfg = GigConfig::default();
        let p = gig_attribute(&Model::Trees(e.clone()), &a, &b, &cfg).unwrap().phi;
        let q = gig_attribute(&Model::Trees(m.clone()), &sa, &sb, &cfg).unwrap().phi;
        prop_assert_eq!(p[0], q[1]);
        prop_assert_eq!(p[1], q[0]);
        let p = shapley_exact(&Model::Trees(e), &a, &b).unwrap().phi;
        let q = shapley_exact(&Model::Trees(m), &sa, &sb).unwrap().phi;
        prop_assert_eq!(p[0], q[1]);
        prop_assert_eq!(p[1], q[0]);
    }

    #[test]
    fn subset_and_permutation_forms_agree(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees = (0..8).map(|_| random_tree(&mut rng, n, 4)).collect();
        let tree_model = Model::Trees(TreeEnsemble::new(trees, n, Link::Logistic, Aggregation::Sum).unwrap());
        let analytic = Model::Analytic(
            AnalyticModel::linear_combination(vec![
                (1.0, random_separable(&mut rng, n).into()),
                (0.5, random_bilinear(&mut rng, n).into()),
            ])
            .unwrap(),
        );
        for m in [tree_model, analytic] {
            let a = random_point(&mut rng, n);
            let b = random_point(&mut rng, n);
            let s = shapley_exact(&m, &a, &b).unwrap();
            let p = shapley_permutation(&m, &a, &b).unwrap();
            for i in 0..n {
                prop_assert!((s.phi[i] - p.phi[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shapley_unchanged_by_monotone_reparametrization(seed in any::<u64>(), which in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3;
        let trees = (0..10).map(|_| random_tree(&mut rng, n, 3)).collect();
        let m = Model::Trees(TreeEnsemble::new(trees, n, Link::Identity, Aggregation::Sum).unwrap());
        let a = random_point(&mut rng, n);
        let b = random_point(&mut rng, n);
        let feature = rng.gen_range(0..n);
        let map: Arc<dyn pathattr::transform::FeatureMap> = match which {
            0 => Arc::new(Affine { scale: -2.5, offset: 1.0 }),
            1 => Arc::new(Cube),
            _ => Arc::new(Exp),
        };
        let t = transform_feature(&m, &a, &b, feature, map).unwrap();
        let before = shapley_exact(&m, &a, &b).unwrap().phi;
        let after = shapley_exact(&t.model, &t.x_ref, &t.x_expl).unwrap().phi;
        for i in 0..n {
            prop_assert!((before[i] - after[i]).abs() < 1e-9);
        }
    }
}
