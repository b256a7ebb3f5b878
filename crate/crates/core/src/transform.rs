//! Strictly monotone per-feature reparametrizations, used to probe the
//! scale (in)variance of attribution methods.
//!
//! Transforming feature `i` by `g` maps the inputs to `x'_i = g(x_i)` and the
//! model to `f ∘ g⁻¹`, so the transformed problem scores every point exactly
//! as before.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::model::{AnalyticForm, AnalyticModel, Model, TreeEnsemble};

pub trait FeatureMap: Send + Sync {
    fn name(&self) -> &str;
    fn forward(&self, x: f64) -> f64;
    fn inverse(&self, y: f64) -> f64;
    /// `d g⁻¹(y) / dy`
    fn inverse_derivative(&self, y: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct Affine {
    pub scale: f64,
    pub offset: f64,
}

impl FeatureMap for Affine {
    fn name(&self) -> &str {
        "affine"
    }
    fn forward(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }
    fn inverse(&self, y: f64) -> f64 {
        (y - self.offset) / self.scale
    }
    fn inverse_derivative(&self, _y: f64) -> f64 {
        1.0 / self.scale
    }
}

/// `g(x) = x³`
#[derive(Debug, Clone, Copy)]
pub struct Cube;

impl FeatureMap for Cube {
    fn name(&self) -> &str {
        "cube"
    }
    fn forward(&self, x: f64) -> f64 {
        x * x * x
    }
    fn inverse(&self, y: f64) -> f64 {
        y.cbrt()
    }
    fn inverse_derivative(&self, y: f64) -> f64 {
        let r = y.cbrt();
        1.0 / (3.0 * r * r)
    }
}

/// `g(x) = eˣ`
#[derive(Debug, Clone, Copy)]
pub struct Exp;

impl FeatureMap for Exp {
    fn name(&self) -> &str {
        "exp"
    }
    fn forward(&self, x: f64) -> f64 {
        x.exp()
    }
    fn inverse(&self, y: f64) -> f64 {
        y.ln()
    }
    fn inverse_derivative(&self, y: f64) -> f64 {
        1.0 / y
    }
}

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A map given by closures.
pub struct CustomMap {
    name: String,
    forward: ScalarFn,
    inverse: ScalarFn,
    inverse_derivative: ScalarFn,
}

impl CustomMap {
    pub fn new(
        name: impl Into<String>,
        forward: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse_derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomMap {
            name: name.into(),
            forward: Box::new(forward),
            inverse: Box::new(inverse),
            inverse_derivative: Box::new(inverse_derivative),
        }
    }
}

impl FeatureMap for CustomMap {
    fn name(&self) -> &str {
        &self.name
    }
    fn forward(&self, x: f64) -> f64 {
        (self.forward)(x)
    }
    fn inverse(&self, y: f64) -> f64 {
        (self.inverse)(y)
    }
    fn inverse_derivative(&self, y: f64) -> f64 {
        (self.inverse_derivative)(y)
    }
}

/// Explanation problem after reparametrizing one feature.
#[derive(Debug, Clone)]
pub struct TransformedProblem {
    pub model: Model,
    pub x_ref: Vec<f64>,
    pub x_expl: Vec<f64>,
}

const PROBE_POINTS: usize = 257;

/// Direction of `map` on `[lo, hi]`: `Ok(true)` if increasing. Rejects maps
/// that are not strictly monotone or whose inverse does not undo them.
fn probe_monotone(map: &dyn FeatureMap, lo: f64, hi: f64) -> Result<bool> {
    let mut direction = None;
    let mut prev = map.forward(lo);
    for k in 0..PROBE_POINTS {
        let x = lo + (hi - lo) * k as f64 / (PROBE_POINTS - 1) as f64;
        let y = map.forward(x);
        let back = map.inverse(y);
        if !y.is_finite() || (back - x).abs() > 1e-9 * x.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "map `{}` is not invertible at {x}",
                map.name()
            )));
        }
        if k > 0 {
            let up = y > prev;
            if y == prev || direction.is_some_and(|d| d != up) {
                return Err(Error::InvalidInput(format!(
                    "map `{}` is not strictly monotone on [{lo}, {hi}]",
                    map.name()
                )));
            }
            direction = Some(up);
        }
        prev = y;
    }
    Ok(direction.unwrap_or(true))
}

fn collect_thresholds(model: &Model, feature: usize, out: &mut Vec<f64>) {
    match model {
        Model::Trees(t) => out.extend(
            t.trees()
                .iter()
                .flat_map(|tree| tree.splits())
                .filter(|&(f, th)| f == feature && th.is_finite())
                .map(|(_, th)| th),
        ),
        Model::Analytic(a) => {
            if let AnalyticForm::LinearCombination { terms } = a.form() {
                for (_, m) in terms {
                    collect_thresholds(m, feature, out);
                }
            }
        }
    }
}

fn transform_model(model: &Model, feature: usize, map: &Arc<dyn FeatureMap>, increasing: bool) -> Result<Model> {
    Ok(match model {
        Model::Trees(t) => Model::Trees(transform_trees(t, feature, map.as_ref(), increasing)),
        Model::Analytic(a) => match a.form() {
            AnalyticForm::LinearCombination { terms } => {
                let subs = terms
                    .iter()
                    .map(|(c, m)| Ok((*c, transform_model(m, feature, map, increasing)?)))
                    .collect::<Result<Vec<_>>>()?;
                Model::Analytic(AnalyticModel::linear_combination(subs)?)
            }
            _ => Model::Analytic(AnalyticModel::reparametrized(a.clone(), feature, map.clone())),
        },
    })
}

// A decreasing map flips the split direction; the tie at the threshold then
// routes to the other side, which only matters for points exactly on it.
fn transform_trees(t: &TreeEnsemble, feature: usize, map: &dyn FeatureMap, increasing: bool) -> TreeEnsemble {
    let trees = t
        .trees()
        .iter()
        .map(|tree| tree.map_thresholds(feature, |th| map.forward(th), !increasing))
        .collect();
    t.with_trees(trees)
}

/// Reparametrize feature `feature` by `map`, returning the transformed points
/// and the wrapped model `f ∘ g⁻¹`.
pub fn transform_feature(
    model: &Model,
    x_ref: &[f64],
    x_expl: &[f64],
    feature: usize,
    map: Arc<dyn FeatureMap>,
) -> Result<TransformedProblem> {
    let n = model.n_features();
    check_dim(n, x_ref.len())?;
    check_dim(n, x_expl.len())?;
    if feature >= n {
        return Err(Error::InvalidInput(format!("feature {feature} >= {n}")));
    }
    let mut span = vec![x_ref[feature], x_expl[feature]];
    collect_thresholds(model, feature, &mut span);
    let lo = span.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = span.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
    let increasing = probe_monotone(map.as_ref(), lo - pad, hi + pad)?;

    let apply = |x: &[f64]| {
        let mut y = x.to_vec();
        y[feature] = map.forward(x[feature]);
        y
    };
    Ok(TransformedProblem {
        model: transform_model(model, feature, &map, increasing)?,
        x_ref: apply(x_ref),
        x_expl: apply(x_expl),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Aggregation, Link, Tree};

    #[test]
    fn rejects_non_monotone_map() {
        let square = Arc::new(CustomMap::new("square", |x| x * x, |y| y.sqrt(), |y| 0.5 / y.sqrt()));
        let m = Model::Analytic(AnalyticModel::linear(vec![1.0, 1.0], 0.0).unwrap());
        let err = transform_feature(&m, &[-1.0, 0.0], &[1.0, 0.0], 0, square).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn transformed_model_scores_identically() {
        let trees = Model::Trees(
            TreeEnsemble::new(
                vec![Tree::stump(0, 0.3, 1.0, 2.0), Tree::stump(1, -0.2, 0.0, 5.0)],
                2,
                Link::Identity,
                Aggregation::Sum,
            )
            .unwrap(),
        );
        let decreasing: Arc<dyn FeatureMap> = Arc::new(Affine { scale: -2.0, offset: 1.0 });
        for map in [Arc::new(Cube) as Arc<dyn FeatureMap>, Arc::new(Exp), decreasing] {
            let tp = transform_feature(&trees, &[-1.0, -1.0], &[1.0, 1.0], 0, map.clone()).unwrap();
            for k in 0..50 {
                let x = [-1.0 + 0.0413 * k as f64, 0.5];
                let xt = [map.forward(x[0]), 0.5];
                assert_eq!(trees.eval(&x).unwrap(), tp.model.eval(&xt).unwrap(), "{} at {x:?}", map.name());
            }
        }
    }
}
