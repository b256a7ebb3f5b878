//! Scoring models: decision-tree ensembles and closed-form analytic models,
//! behind one evaluation interface, plus the JSON model format.

mod analytic;
mod format;
mod tree;

pub use analytic::{AnalyticForm, AnalyticModel, Polynomial};
pub use format::{load_model, save_model, FORMAT_VERSION};
pub use tree::{Aggregation, Link, Tree, TreeEnsemble, LEAF};

use crate::error::{Error, Result};

/// Any model the attribution engines accept. Immutable and `Sync`, so one
/// instance can be shared across concurrent evaluators.
#[derive(Debug, Clone)]
pub enum Model {
    Trees(TreeEnsemble),
    Analytic(AnalyticModel),
}

impl Model {
    pub fn n_features(&self) -> usize {
        match self {
            Model::Trees(t) => t.n_features(),
            Model::Analytic(a) => a.n_features(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Trees(t) => t.eval(x),
            Model::Analytic(a) => a.eval(x),
        }
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Model::Trees(t) => t.eval_unchecked(x),
            Model::Analytic(a) => a.eval_unchecked(x),
        }
    }

    /// Exact gradient; tree ensembles are piecewise constant and unsupported.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Model::Trees(_) => Err(Error::Unsupported(
                "gradient of a tree ensemble (piecewise constant)".into(),
            )),
            Model::Analytic(a) => a.grad(x),
        }
    }
}

impl From<TreeEnsemble> for Model {
    fn from(t: TreeEnsemble) -> Self {
        Model::Trees(t)
    }
}

impl From<AnalyticModel> for Model {
    fn from(a: AnalyticModel) -> Self {
        Model::Analytic(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_centerline() -> Polynomial {
        // -(4t)^11 - t + 1/2 with t = x - 1/2
        let mut c = vec![0.0; 12];
        c[0] = 0.5;
        c[1] = -1.0;
        c[11] = -(4.0f64.powi(11));
        Polynomial::new(0.5, c)
    }

    fn central_difference(m: &Model, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut hi = x.to_vec();
                let mut lo = x.to_vec();
                hi[i] += h;
                lo[i] -= h;
                (m.eval(&hi).unwrap() - m.eval(&lo).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    fn assert_grad_matches(m: &Model, x: &[f64], tol: f64) {
        let g = m.grad(x).unwrap();
        let fd = central_difference(m, x, 1e-6);
        let scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-3);
        for (a, b) in g.iter().zip(&fd) {
            assert!(
                (a - b).abs() / scale < tol,
                "grad {g:?} vs finite difference {fd:?} at {x:?}"
            );
        }
    }

    #[test]
    fn eval_examples() {
        let stump = Model::Trees(
            TreeEnsemble::new(
                vec![Tree::stump(0, 0.5, 0.0, 1.0)],
                1,
                Link::Identity,
                Aggregation::Sum,
            )
            .unwrap(),
        );
        assert_eq!(stump.eval(&[0.2]).unwrap(), 0.0);

        let lin = Model::Analytic(AnalyticModel::linear(vec![2.0, 3.0], 1.0).unwrap());
        assert_eq!(lin.eval(&[1.0, 1.0]).unwrap(), 6.0);

        let field =
            Model::Analytic(AnalyticModel::tanh_field(0.125, toy_centerline()).unwrap());
        assert_eq!(field.eval(&[0.5, 0.5]).unwrap(), 0.5);
        assert!(matches!(
            field.eval(&[0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grad_examples() {
        let bl = Model::Analytic(
            AnalyticModel::bilinear(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
        );
        assert_eq!(bl.grad(&[2.0, 7.0]).unwrap(), vec![7.0, 2.0]);
        let lin = Model::Analytic(AnalyticModel::linear(vec![2.0, -3.0], 1.0).unwrap());
        assert_eq!(lin.grad(&[9.0, 4.0]).unwrap(), vec![2.0, -3.0]);
        let trees = Model::Trees(
            TreeEnsemble::new(
                vec![Tree::stump(0, 0.5, 0.0, 1.0)],
                1,
                Link::Identity,
                Aggregation::Sum,
            )
            .unwrap(),
        );
        assert!(matches!(trees.grad(&[0.0]), Err(Error::Unsupported(_))));

        let field =
            Model::Analytic(AnalyticModel::tanh_field(0.125, toy_centerline()).unwrap());
        let g = field.grad(&[0.5, 0.5]).unwrap();
        let fd = central_difference(&field, &[0.5, 0.5], 1e-6);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-6 * a.abs(), "{g:?} vs {fd:?}");
        }
    }

    fn random_models(rng: &mut ChaCha8Rng) -> Vec<Model> {
        let n = 3;
        let mut r = |s: f64| rng.gen_range(-s..s);
        let lin = AnalyticModel::linear(vec![r(2.0), r(2.0), r(2.0)], r(1.0)).unwrap();
        let sep = AnalyticModel::separable(
            (0..n)
                .map(|_| Polynomial::new(r(1.0), vec![r(1.0), r(1.0), r(1.0), r(1.0)]))
                .collect(),
        )
        .unwrap();
        let bil = AnalyticModel::bilinear(
            (0..n).map(|_| (0..n).map(|_| r(1.0)).collect()).collect(),
        )
        .unwrap();
        let combo = AnalyticModel::linear_combination(vec![
            (r(2.0), Model::Analytic(sep.clone())),
            (r(2.0), Model::Analytic(bil.clone())),
        ])
        .unwrap();
        vec![
            Model::Analytic(lin),
            Model::Analytic(sep),
            Model::Analytic(bil),
            Model::Analytic(combo),
        ]
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let models = random_models(&mut rng);
        let field =
            Model::Analytic(AnalyticModel::tanh_field(0.125, toy_centerline()).unwrap());
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            for m in &models {
                assert_grad_matches(m, &x, 1e-5);
            }
            // keep the field away from its near-flat saturated region
            let x1 = rng.gen_range(0.3..0.7);
            let c = toy_centerline().eval(x1);
            let x2 = c + rng.gen_range(-0.2..0.2);
            assert_grad_matches(&field, &[x1, x2], 1e-5);
        }
    }

    #[test]
    fn linear_combination_evaluates_as_combination() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let models = random_models(&mut rng);
        let combo = AnalyticModel::linear_combination(vec![
            (0.7, models[0].clone()),
            (-1.3, models[1].clone()),
            (2.0, models[2].clone()),
        ])
        .unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let direct = 0.7 * models[0].eval(&x).unwrap() - 1.3 * models[1].eval(&x).unwrap()
                + 2.0 * models[2].eval(&x).unwrap();
            assert!((combo.eval(&x).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_is_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let models = random_models(&mut rng);
        let x = [0.3, -0.1, 0.9];
        for m in &models {
            assert_eq!(m.eval(&x).unwrap().to_bits(), m.eval(&x).unwrap().to_bits());
        }
    }
}
