use super::attribute::{attribute_along_path, GigConfig};
use crate::error::{Error, Result};
use crate::model::{AnalyticModel, Model};
use crate::paths::Path;

/// Observed and predicted difference in one feature's credit between two
/// paths with shared endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremGap {
    /// `φ_i(path_a) - φ_i(path_b)` by quadrature.
    pub observed: f64,
    /// Mixed-partial flux through the region between the paths.
    pub predicted: f64,
    /// Signed shoelace area of the loop `path_b` then `path_a` reversed;
    /// positive when that loop runs counter-clockwise.
    pub swept_area: f64,
    pub mixed_partial: f64,
}

fn shoelace(points: &[&[f64]]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|k| {
            let (p, q) = (points[k], points[(k + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    0.5 * twice
}

/// Compare feature `feature`'s credit along two planar paths against the
/// Stokes prediction for a model with constant mixed partial `m`:
/// feature 0 gains `m · area` and feature 1 loses the same amount.
pub fn theorem_gap(
    model: &AnalyticModel,
    path_a: &Path,
    path_b: &Path,
    feature: usize,
    cfg: &GigConfig,
) -> Result<TheoremGap> {
    if model.n_features() != 2 || path_a.dim() != 2 || path_b.dim() != 2 {
        return Err(Error::InvalidInput("theorem_gap needs a two-feature model and paths".into()));
    }
    if feature > 1 {
        return Err(Error::InvalidInput(format!("feature {feature} out of range")));
    }
    if path_a.start() != path_b.start() || path_a.end() != path_b.end() {
        return Err(Error::InvalidInput("paths must share endpoints".into()));
    }
    let mixed_partial = model.constant_mixed_partial(0, 1).ok_or_else(|| {
        Error::Unsupported("model does not have a constant mixed partial".into())
    })?;
    let wrapped = Model::Analytic(model.clone());
    let phi_a = attribute_along_path(&wrapped, path_a, cfg)?;
    let phi_b = attribute_along_path(&wrapped, path_b, cfg)?;

    let mut loop_points: Vec<&[f64]> = path_b.vertices().iter().map(Vec::as_slice).collect();
    loop_points.extend(path_a.vertices().iter().rev().skip(1).map(Vec::as_slice));
    loop_points.pop(); // back at the shared start
    let swept_area = shoelace(&loop_points);
    let flux = mixed_partial * swept_area;
    Ok(TheoremGap {
        observed: phi_a.phi[feature] - phi_b.phi[feature],
        predicted: if feature == 0 { flux } else { -flux },
        swept_area,
        mixed_partial,
    })
}
