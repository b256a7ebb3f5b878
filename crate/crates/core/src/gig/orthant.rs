use crate::error::{Error, Result};
use crate::model::{AnalyticForm, Model, TreeEnsemble};
use crate::shapley::shapley_from_coalition_values;

/// A point where `features.len()` feature-orthogonal discontinuities meet.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    pub point: Vec<f64>,
    pub features: Vec<usize>,
    /// Split value of each crossing feature.
    pub thresholds: Vec<f64>,
    /// Sign of the path's motion along each crossing feature.
    pub directions: Vec<f64>,
}

/// Sorted, de-duplicated split thresholds per feature.
#[derive(Debug, Clone, Default)]
pub struct ThresholdIndex {
    per_feature: Vec<Vec<f64>>,
}

impl ThresholdIndex {
    pub fn from_ensemble(e: &TreeEnsemble) -> Self {
        let mut idx = ThresholdIndex {
            per_feature: vec![Vec::new(); e.n_features()],
        };
        idx.add_ensemble(e);
        idx.finish()
    }

    pub fn from_model(model: &Model) -> Self {
        let mut idx = ThresholdIndex {
            per_feature: vec![Vec::new(); model.n_features()],
        };
        idx.add_model(model);
        idx.finish()
    }

    fn add_ensemble(&mut self, e: &TreeEnsemble) {
        for tree in e.trees() {
            for (f, t) in tree.splits() {
                self.per_feature[f].push(t);
            }
        }
    }

    fn add_model(&mut self, model: &Model) {
        match model {
            Model::Trees(e) => self.add_ensemble(e),
            Model::Analytic(a) => {
                if let AnalyticForm::LinearCombination { terms } = a.form() {
                    for (_, m) in terms {
                        self.add_model(m);
                    }
                }
            }
        }
    }

    fn finish(mut self) -> Self {
        for v in &mut self.per_feature {
            v.retain(|t| t.is_finite());
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        self
    }

    /// The thresholds of `feature` nearest to `value` on either side.
    pub(crate) fn neighbours(&self, feature: usize, value: f64) -> impl Iterator<Item = f64> + '_ {
        let ts = &self.per_feature[feature];
        let i = ts.partition_point(|&t| t < value);
        ts[i.saturating_sub(1)..(i + 1).min(ts.len())].iter().copied()
    }

    /// Probe values strictly below and at-or-above `threshold`, inside the
    /// regions adjacent to it: midway to the next distinct threshold, or a
    /// small relative offset when there is none on that side.
    pub fn probes(&self, feature: usize, threshold: f64, tol: f64) -> (f64, f64) {
        let ts = &self.per_feature[feature];
        let fallback = 1e-9 * threshold.abs().max(1.0);
        let below_idx = ts.partition_point(|&t| t < threshold - tol);
        let below = if below_idx > 0 {
            0.5 * (threshold + ts[below_idx - 1])
        } else {
            threshold - fallback
        };
        let above_idx = ts.partition_point(|&t| t <= threshold + tol);
        let above = match ts.get(above_idx) {
            Some(&t) => 0.5 * (threshold + t),
            None => threshold + fallback,
        };
        (below, above.max(threshold + tol))
    }
}

/// Shapley credit for a corner, one entry per `corner.features`.
///
/// Coalition `S` is the orthant with the features in `S` on their
/// post-crossing side and the rest on their pre-crossing side. `pinned`, when
/// given, supplies `(f(all pre), f(all post))` so the credits sum to exactly
/// that jump.
pub(crate) fn corner_credits(
    eval: impl Fn(&[f64]) -> f64,
    corner: &Corner,
    index: &ThresholdIndex,
    pinned: Option<(f64, f64)>,
    limit: usize,
) -> Result<Vec<f64>> {
    let k = corner.features.len();
    if k > limit || k > 63 {
        return Err(Error::CornerTooWide {
            features: corner.features.clone(),
            limit,
        });
    }
    let sides: Vec<(f64, f64)> = corner
        .features
        .iter()
        .zip(&corner.thresholds)
        .zip(&corner.directions)
        .map(|((&f, &t), &d)| {
            let tol = 1e-10 * t.abs().max(corner.point[f].abs()).max(1.0);
            let (below, above) = index.probes(f, t, tol);
            if d >= 0.0 {
                (below, above)
            } else {
                (above, below)
            }
        })
        .collect();
    let full = (1usize << k) - 1;
    let mut point = corner.point.clone();
    let values: Vec<f64> = (0..=full)
        .map(|mask| {
            if let Some((pre, post)) = pinned {
                if mask == 0 {
                    return pre;
                }
                if mask == full {
                    return post;
                }
            }
            for (j, &f) in corner.features.iter().enumerate() {
                point[f] = if mask >> j & 1 == 1 { sides[j].1 } else { sides[j].0 };
            }
            eval(&point)
        })
        .collect();
    Ok(shapley_from_coalition_values(&values, k))
}

/// Orthant Shapley values at a corner of `model`'s discontinuities. The
/// credits sum to `f(all post) - f(all pre)`.
pub fn orthant_shapley(model: &Model, corner: &Corner, limit: usize) -> Result<Vec<f64>> {
    let n = model.n_features();
    crate::error::check_dim(n, corner.point.len())?;
    let k = corner.features.len();
    if corner.thresholds.len() != k || corner.directions.len() != k {
        return Err(Error::InvalidInput(
            "corner needs one threshold and direction per feature".into(),
        ));
    }
    if corner.features.iter().any(|&f| f >= n) {
        return Err(Error::InvalidInput("corner feature out of range".into()));
    }
    let index = ThresholdIndex::from_model(model);
    corner_credits(|x| model.eval_unchecked(x), corner, &index, None, limit)
}
