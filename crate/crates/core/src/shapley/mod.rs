//! Interventional (baseline) Shapley values: features absent from a
//! coalition take the reference point's value.

mod expectation;

pub use expectation::{expected_attribution, ConvergenceReport, ExpectationConfig, ReferenceSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attribution::{AttributionResult, Method};
use crate::error::{check_dim, Error, Result};
use crate::model::Model;
use crate::paths::{masked_point_unchecked, permutations, FeatureSubset};
use crate::stats::RunningMoments;

pub const DEFAULT_EXACT_LIMIT: usize = 15;
pub const DEFAULT_PERMUTATION_LIMIT: usize = 8;

/// Shapley values of a `k`-player game given the value of every coalition,
/// indexed by bitmask.
pub(crate) fn shapley_from_coalition_values(values: &[f64], k: usize) -> Vec<f64> {
    debug_assert_eq!(values.len(), 1 << k);
    if k == 0 {
        return Vec::new();
    }
    // |S|! (k - |S| - 1)! / k!
    let mut weight = vec![0.0; k];
    weight[0] = 1.0 / k as f64;
    for s in 1..k {
        weight[s] = weight[s - 1] * s as f64 / (k - s) as f64;
    }
    let mut phi = vec![0.0; k];
    for (mask, &v) in values.iter().enumerate() {
        let w = weight.get(mask.count_ones() as usize);
        let Some(&w) = w else { continue };
        for (i, p) in phi.iter_mut().enumerate() {
            if mask >> i & 1 == 0 {
                *p += w * (values[mask | 1 << i] - v);
            }
        }
    }
    phi
}

fn check_pair(model: &Model, x_ref: &[f64], x_expl: &[f64]) -> Result<usize> {
    let n = model.n_features();
    check_dim(n, x_ref.len())?;
    check_dim(n, x_expl.len())?;
    Ok(n)
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(v))
    }
}

/// Subset form with every masked score computed once (`2^n` evaluations).
pub fn shapley_exact(model: &Model, x_ref: &[f64], x_expl: &[f64]) -> Result<AttributionResult> {
    shapley_exact_with_limit(model, x_ref, x_expl, DEFAULT_EXACT_LIMIT)
}

pub fn shapley_exact_with_limit(
    model: &Model,
    x_ref: &[f64],
    x_expl: &[f64],
    limit: usize,
) -> Result<AttributionResult> {
    let n = check_pair(model, x_ref, x_expl)?;
    if n > limit || n > 30 {
        return Err(Error::TooManyFeatures {
            n,
            limit,
            method: "exact Shapley",
            suggestion: "shapley_sampled",
        });
    }
    let values = (0..1u64 << n)
        .map(|mask| {
            let x = masked_point_unchecked(x_expl, x_ref, FeatureSubset::from_bits(mask));
            finite(model.eval_unchecked(&x))
        })
        .collect::<Result<Vec<f64>>>()?;
    let phi = shapley_from_coalition_values(&values, n);
    let change = values[values.len() - 1] - values[0];
    Ok(AttributionResult::new(phi, change, Method::ShapleyExact))
}

/// Marginal contributions along one feature ordering, added into `out`.
fn walk_ordering(model: &Model, x_ref: &[f64], x_expl: &[f64], order: &[usize], out: &mut [f64]) -> Result<()> {
    let mut x = x_ref.to_vec();
    let mut prev = finite(model.eval_unchecked(&x))?;
    for &f in order {
        x[f] = x_expl[f];
        let cur = finite(model.eval_unchecked(&x))?;
        out[f] += cur - prev;
        prev = cur;
    }
    Ok(())
}

/// Permutation form: average marginal contribution over all `n!` orderings.
pub fn shapley_permutation(model: &Model, x_ref: &[f64], x_expl: &[f64]) -> Result<AttributionResult> {
    let n = check_pair(model, x_ref, x_expl)?;
    if n > DEFAULT_PERMUTATION_LIMIT {
        return Err(Error::TooManyFeatures {
            n,
            limit: DEFAULT_PERMUTATION_LIMIT,
            method: "permutation-form Shapley",
            suggestion: "shapley_exact or shapley_sampled",
        });
    }
    let orders = permutations(n);
    let mut sum = vec![0.0; n];
    for order in &orders {
        walk_ordering(model, x_ref, x_expl, order, &mut sum)?;
    }
    let count = orders.len() as f64;
    let phi: Vec<f64> = sum.into_iter().map(|s| s / count).collect();
    let change = model.eval_unchecked(x_expl) - model.eval_unchecked(x_ref);
    Ok(AttributionResult::new(phi, change, Method::ShapleyPermutation))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub seed: u64,
    /// Stop once every feature's standard error is below this.
    pub target_stderr: f64,
    pub max_permutations: usize,
    /// Permutations required before the stopping rule may fire.
    pub min_permutations: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            seed: 0,
            target_stderr: 1e-3,
            max_permutations: 10_000,
            min_permutations: 8,
        }
    }
}

/// Monte Carlo permutation estimator. Uniform random orderings, seeded;
/// unbiased for the exact values.
pub fn shapley_sampled(
    model: &Model,
    x_ref: &[f64],
    x_expl: &[f64],
    cfg: &SamplingConfig,
) -> Result<(AttributionResult, ConvergenceReport)> {
    let n = check_pair(model, x_ref, x_expl)?;
    if cfg.max_permutations < 2 {
        return Err(Error::InvalidInput("max_permutations must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut moments = RunningMoments::new(n);
    let mut contrib = vec![0.0; n];
    let mut samples: Vec<Vec<f64>> = Vec::new();
    let below = |se: &Option<Vec<f64>>| {
        se.as_ref()
            .is_some_and(|s| s.iter().all(|&v| v < cfg.target_stderr))
    };
    while samples.len() < cfg.max_permutations {
        order.shuffle(&mut rng);
        contrib.iter_mut().for_each(|c| *c = 0.0);
        walk_ordering(model, x_ref, x_expl, &order, &mut contrib)?;
        moments.push(&contrib, 1.0);
        samples.push(contrib.clone());
        if samples.len() >= cfg.min_permutations.max(2) && below(&moments.stderr()) {
            break;
        }
    }
    let mut report = expectation::summarize(&samples, None, &[], 0, cfg.target_stderr);
    let change = model.eval_unchecked(x_expl) - model.eval_unchecked(x_ref);
    let mut result = AttributionResult::new(report.mean_phi.clone(), change, Method::ShapleySampled);
    result.stderr = report.stderr_phi.clone();
    report.efficiency_residual = result.efficiency_residual;
    Ok((result, report))
}
