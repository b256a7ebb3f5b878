use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attribution::AttributionResult;
use crate::error::{check_dim, Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::stats::{pairwise_sum, weighted_stderr, RunningMoments};

/// A finite population of reference points with optional positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    points: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

impl ReferenceSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidInput("reference set is empty".into()));
        };
        let dim = first.len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "reference {i} has {} features, expected {dim}",
                    p.len()
                )));
            }
        }
        Ok(ReferenceSet { points, weights: None })
    }

    pub fn weighted(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let mut set = Self::new(points)?;
        check_dim(set.points.len(), weights.len())?;
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidInput(format!("reference weight {w} is not positive")));
        }
        set.weights = Some(weights);
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub mean_phi: Vec<f64>,
    /// `None` when fewer than two samples were used.
    pub stderr_phi: Option<Vec<f64>>,
    pub n_used: usize,
    /// Samples skipped because the attributor failed or returned non-finite values.
    pub n_failed: usize,
    /// Whether every stderr ended below the target.
    pub converged: bool,
    pub efficiency_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationConfig {
    /// Stop early once every feature's stderr is below this; `0` consumes
    /// the whole population.
    pub target_stderr: f64,
    pub shuffle_seed: u64,
    pub min_samples: usize,
    /// References attributed per parallel batch.
    pub batch_size: usize,
    pub execution: Execution,
}

impl Default for ExpectationConfig {
    fn default() -> Self {
        ExpectationConfig {
            target_stderr: 0.0,
            shuffle_seed: 0,
            min_samples: 8,
            batch_size: 64,
            execution: Execution::default(),
        }
    }
}

/// Weighted mean, stderr and residual from accepted samples, using
/// order-fixed pairwise sums so results do not depend on thread count.
pub(crate) fn summarize(
    samples: &[Vec<f64>],
    weights: Option<&[f64]>,
    residuals: &[f64],
    n_failed: usize,
    target: f64,
) -> ConvergenceReport {
    let n = samples.len();
    let dim = samples.first().map_or(0, Vec::len);
    let w = |k: usize| weights.map_or(1.0, |w| w[k]);
    let ws: Vec<f64> = (0..n).map(w).collect();
    let wsum = pairwise_sum(&ws);
    let wsq = pairwise_sum(&ws.iter().map(|v| v * v).collect::<Vec<_>>());
    let mut mean = vec![0.0; dim];
    let mut sq_dev = vec![0.0; dim];
    let mut buf = vec![0.0; n];
    for j in 0..dim {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = ws[k] * samples[k][j];
        }
        mean[j] = pairwise_sum(&buf) / wsum;
        for (k, b) in buf.iter_mut().enumerate() {
            let d = samples[k][j] - mean[j];
            *b = ws[k] * d * d;
        }
        sq_dev[j] = pairwise_sum(&buf);
    }
    let stderr = weighted_stderr(n, wsum, wsq, sq_dev.into_iter());
    let efficiency_residual = if residuals.is_empty() {
        0.0
    } else {
        let r: Vec<f64> = residuals.iter().enumerate().map(|(k, r)| ws[k] * r).collect();
        pairwise_sum(&r) / wsum
    };
    ConvergenceReport {
        converged: below_target(&stderr, target),
        mean_phi: mean,
        stderr_phi: stderr,
        n_used: n,
        n_failed,
        efficiency_residual,
    }
}

fn below_target(stderr: &Option<Vec<f64>>, target: f64) -> bool {
    stderr.as_ref().is_some_and(|s| s.iter().all(|&v| v < target))
}

/// Mean attribution of `x_expl` over a reference population.
///
/// References are visited in a seeded shuffled order and attributed in
/// batches (in parallel when enabled); results are folded sequentially so the
/// stopping decision and the output are identical for any thread count.
/// A reference whose attribution fails or is non-finite is skipped and
/// counted in `n_failed`; if every reference fails, the first error is
/// returned.
pub fn expected_attribution<F>(
    attributor: F,
    refs: &ReferenceSet,
    x_expl: &[f64],
    cfg: &ExpectationConfig,
) -> Result<ConvergenceReport>
where
    F: Fn(&[f64], &[f64]) -> Result<AttributionResult> + Sync + Send,
{
    check_dim(refs.dim(), x_expl.len())?;
    if !(cfg.target_stderr >= 0.0) {
        return Err(Error::InvalidInput("target_stderr must be non-negative".into()));
    }
    let mut order: Vec<usize> = (0..refs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.shuffle_seed));

    let dim = x_expl.len();
    let mut moments = RunningMoments::new(dim);
    let mut samples = Vec::new();
    let mut weights = Vec::new();
    let mut residuals = Vec::new();
    let mut n_failed = 0;
    let mut first_error = None;
    let early_stop = cfg.target_stderr > 0.0;
    'outer: for batch in order.chunks(cfg.batch_size.max(1)) {
        let results = map_ordered(cfg.execution, batch, |_, &i| attributor(&refs.points[i], x_expl));
        for (&i, result) in batch.iter().zip(results) {
            match result {
                Ok(r) if r.phi.len() == dim && r.phi.iter().all(|v| v.is_finite()) => {
                    let w = refs.weight(i);
                    moments.push(&r.phi, w);
                    samples.push(r.phi);
                    weights.push(w);
                    residuals.push(r.efficiency_residual);
                }
                Ok(r) => {
                    n_failed += 1;
                    first_error.get_or_insert(Error::NonFinite(
                        r.phi.iter().copied().find(|v| !v.is_finite()).unwrap_or(f64::NAN),
                    ));
                }
                Err(e) => {
                    n_failed += 1;
                    first_error.get_or_insert(e);
                }
            }
            if early_stop
                && moments.count() >= cfg.min_samples.max(2)
                && below_target(&moments.stderr(), cfg.target_stderr)
            {
                break 'outer;
            }
        }
    }
    if samples.is_empty() {
        return Err(first_error.expect("at least one reference was attempted"));
    }
    Ok(summarize(&samples, Some(&weights), &residuals, n_failed, cfg.target_stderr))
}
