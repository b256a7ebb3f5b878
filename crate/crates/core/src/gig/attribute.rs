use super::merge::{coincident, merge_unchecked, SegmentList};
use super::orthant::{corner_credits, Corner, ThresholdIndex};
use super::splits::find_splits_unchecked;
use crate::attribution::{AttributionResult, Method};
use crate::error::{check_dim, Error, Result};
use crate::model::{AnalyticForm, AnalyticModel, Model, TreeEnsemble};
use crate::paths::Path;
use crate::quadrature::{integrate, QuadratureConfig};

pub const DEFAULT_CORNER_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GigConfig {
    pub quadrature: QuadratureConfig,
    /// Widest corner (number of simultaneously crossing features) handled by
    /// exact orthant enumeration.
    pub corner_limit: usize,
}

impl Default for GigConfig {
    fn default() -> Self {
        GigConfig {
            quadrature: QuadratureConfig::default(),
            corner_limit: DEFAULT_CORNER_LIMIT,
        }
    }
}

/// Ensemble margin segments along the straight path `a → b`.
pub fn segment_list(ensemble: &TreeEnsemble, a: &[f64], b: &[f64]) -> Result<SegmentList> {
    let n = ensemble.n_features();
    check_dim(n, a.len())?;
    check_dim(n, b.len())?;
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN in path endpoint".into()));
    }
    Ok(segments_unchecked(ensemble, a, b))
}

fn segments_unchecked(ensemble: &TreeEnsemble, a: &[f64], b: &[f64]) -> SegmentList {
    let per_tree: Vec<_> = ensemble
        .trees()
        .iter()
        .map(|t| find_splits_unchecked(t, a, b))
        .collect();
    merge_unchecked(&per_tree, ensemble.aggregation(), ensemble.link())
}

fn straight_point(a: &[f64], b: &[f64], alpha: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(s, e)| s + alpha * (e - s)).collect()
}

#[derive(Default)]
struct Accumulator {
    phi: Vec<f64>,
    quadrature_error: f64,
    converged: bool,
}

fn tree_part(e: &TreeEnsemble, a: &[f64], b: &[f64], scale: f64, cfg: &GigConfig, acc: &mut Accumulator) -> Result<()> {
    let segs = segments_unchecked(e, a, b);
    if segs.breakpoints.is_empty() {
        return Ok(());
    }
    let index = ThresholdIndex::from_ensemble(e);
    for (k, walked) in segs.crossing_features.iter().enumerate() {
        let before = segs.score(k);
        let after = segs.score(k + 1);
        let alpha = segs.breakpoints[k];
        // A split off every tree's route can still pass through this point.
        let mut feats = walked.clone();
        for f in 0..a.len() {
            if a[f] == b[f] || feats.contains(&f) {
                continue;
            }
            let x = a[f] + alpha * (b[f] - a[f]);
            if index
                .neighbours(f, x)
                .any(|t| coincident((t - a[f]) / (b[f] - a[f]), alpha))
            {
                feats.push(f);
            }
        }
        feats.sort_unstable();
        if let [f] = feats[..] {
            acc.phi[f] += scale * (after - before);
            continue;
        }
        if feats.len() > cfg.corner_limit {
            return Err(Error::CornerTooWide {
                features: feats.clone(),
                limit: cfg.corner_limit,
            });
        }
        let point = straight_point(a, b, segs.breakpoints[k]);
        let directions: Vec<f64> = feats.iter().map(|&f| (b[f] - a[f]).signum()).collect();
        assert!(
            feats.iter().all(|&f| a[f] != b[f]),
            "a feature with zero delta cannot cross a split"
        );
        let corner = Corner {
            thresholds: feats.iter().map(|&f| point[f]).collect(),
            features: feats.clone(),
            point,
            directions,
        };
        let credits = corner_credits(
            |x| e.eval_unchecked(x),
            &corner,
            &index,
            Some((before, after)),
            cfg.corner_limit,
        )?;
        for (&f, c) in feats.iter().zip(credits) {
            acc.phi[f] += scale * c;
        }
    }
    Ok(())
}

fn analytic_part(m: &AnalyticModel, a: &[f64], b: &[f64], scale: f64, cfg: &GigConfig, acc: &mut Accumulator) -> Result<()> {
    let delta: Vec<f64> = a.iter().zip(b).map(|(s, e)| e - s).collect();
    if delta.iter().all(|&d| d == 0.0) {
        return Ok(());
    }
    let q = integrate(
        |alpha| {
            let x = straight_point(a, b, alpha);
            let mut g = m.grad(&x)?;
            for (gi, d) in g.iter_mut().zip(&delta) {
                *gi = if *d == 0.0 { 0.0 } else { *gi * d };
            }
            Ok(g)
        },
        a.len(),
        0.0,
        1.0,
        &cfg.quadrature,
    )?;
    for (p, v) in acc.phi.iter_mut().zip(&q.value) {
        *p += scale * v;
    }
    acc.quadrature_error += scale.abs() * q.error_estimate;
    acc.converged &= q.converged;
    Ok(())
}

fn accumulate(model: &Model, a: &[f64], b: &[f64], scale: f64, cfg: &GigConfig, acc: &mut Accumulator) -> Result<()> {
    match model {
        Model::Trees(e) => tree_part(e, a, b, scale, cfg, acc),
        Model::Analytic(m) => match m.form() {
            AnalyticForm::LinearCombination { terms } => {
                for (c, sub) in terms {
                    accumulate(sub, a, b, scale * c, cfg, acc)?;
                }
                Ok(())
            }
            _ => analytic_part(m, a, b, scale, cfg, acc),
        },
    }
}

fn finish(model: &Model, acc: Accumulator, start: &[f64], end: &[f64], method: Method) -> Result<AttributionResult> {
    let change = model.eval_unchecked(end) - model.eval_unchecked(start);
    let result = AttributionResult::new(acc.phi, change, method);
    if !acc.converged {
        return Err(Error::QuadratureNotConverged {
            residual: result.efficiency_residual,
            estimate: result.phi,
        });
    }
    Ok(result)
}

fn check_points(model: &Model, a: &[f64], b: &[f64]) -> Result<()> {
    let n = model.n_features();
    check_dim(n, a.len())?;
    check_dim(n, b.len())?;
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate in endpoint".into()));
    }
    Ok(())
}

/// Generalized Integrated Gradients along the straight line `x_ref → x_expl`.
///
/// Tree ensembles contribute their jumps at each crossing, split among the
/// crossing features by orthant Shapley values (the whole jump for a single
/// feature). Analytic models contribute `Δx_i ∫ ∂f/∂x_i dα` by adaptive
/// quadrature. Linear combinations are attributed term by term.
pub fn gig_attribute(model: &Model, x_ref: &[f64], x_expl: &[f64], cfg: &GigConfig) -> Result<AttributionResult> {
    check_points(model, x_ref, x_expl)?;
    let mut acc = Accumulator {
        phi: vec![0.0; model.n_features()],
        quadrature_error: 0.0,
        converged: true,
    };
    accumulate(model, x_ref, x_expl, 1.0, cfg, &mut acc)?;
    finish(model, acc, x_ref, x_expl, Method::Gig)
}

/// Path-integral attribution along any piecewise-linear path: the sum of
/// straight-line attributions over its legs.
pub fn attribute_along_path(model: &Model, path: &Path, cfg: &GigConfig) -> Result<AttributionResult> {
    check_points(model, path.start(), path.end())?;
    let mut acc = Accumulator {
        phi: vec![0.0; model.n_features()],
        quadrature_error: 0.0,
        converged: true,
    };
    for (from, to) in path.segments() {
        accumulate(model, from, to, 1.0, cfg, &mut acc)?;
    }
    finish(model, acc, path.start(), path.end(), Method::PathIntegral)
}
