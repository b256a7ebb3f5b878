use super::centerline::{select_centerline_points, DEFAULT_BAND, DEFAULT_K};
use super::data::{gen_double_gaussian, gen_uniform_background, Bounds, GaussianSpec, LabeledSample};
use super::derive_seed;
use super::extra_trees::{train_extra_trees, TrainerConfig};
use super::field::ToyFieldSpec;
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::gig::{gig_attribute, GigConfig};
use crate::model::Model;
use crate::shapley::{expected_attribution, shapley_exact, ExpectationConfig, ReferenceSet};

pub const EXPERIMENT_CSV_HEADER: &str =
    "background_n,seed,point_idx,x1,x2,method,phi1,phi2,ratio,stderr1,stderr2,efficiency_residual,converged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentMethod {
    Gig,
    ShapleyExact,
}

impl ExperimentMethod {
    pub const ALL: [ExperimentMethod; 2] = [ExperimentMethod::Gig, ExperimentMethod::ShapleyExact];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentMethod::Gig => "gig",
            ExperimentMethod::ShapleyExact => "shapley-exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub background_counts: Vec<usize>,
    /// One run per seed. Each seed drives training and reference order, and
    /// also data sampling unless `data_seed` is set.
    pub seeds: Vec<u64>,
    /// Share one sampled dataset (and centerline points) across all seeds.
    pub data_seed: Option<u64>,
    pub gaussians: [GaussianSpec; 2],
    pub n_per_gaussian: usize,
    pub field: ToyFieldSpec,
    pub bounds: Bounds,
    /// `seed` is overwritten per run.
    pub trainer: TrainerConfig,
    pub k: usize,
    pub band: f64,
    /// `0` averages over the whole reference set.
    pub target_stderr: f64,
    pub gig: GigConfig,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            background_counts: vec![0, 25, 100, 200],
            seeds: vec![0],
            data_seed: None,
            gaussians: GaussianSpec::default_pair(),
            n_per_gaussian: 300,
            field: ToyFieldSpec::default(),
            bounds: Bounds::default(),
            trainer: TrainerConfig::default(),
            k: DEFAULT_K,
            band: DEFAULT_BAND,
            target_stderr: 0.0,
            gig: GigConfig::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub background_n: usize,
    pub seed: u64,
    pub point_idx: usize,
    pub x: [f64; 2],
    pub method: ExperimentMethod,
    pub phi: [f64; 2],
    /// `None` when the row is unstable (`phi2` negligible) or failed.
    pub ratio: Option<f64>,
    pub stderr: Option<[f64; 2]>,
    pub efficiency_residual: f64,
    pub converged: bool,
    pub error: Option<String>,
}

impl ExperimentRow {
    /// One CSV line matching [`EXPERIMENT_CSV_HEADER`]; missing values are empty.
    pub fn to_csv_line(&self) -> String {
        let num = |v: f64| format!("{v:.16e}");
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        [
            self.background_n.to_string(),
            self.seed.to_string(),
            self.point_idx.to_string(),
            num(self.x[0]),
            num(self.x[1]),
            self.method.as_str().to_string(),
            num(self.phi[0]),
            num(self.phi[1]),
            opt(self.ratio),
            opt(self.stderr.map(|s| s[0])),
            opt(self.stderr.map(|s| s[1])),
            num(self.efficiency_residual),
            self.converged.to_string(),
        ]
        .join(",")
    }
}

/// `phi1 / phi2`, or `None` when `|phi2|` is below `1e-6` of the total
/// score change.
fn ratio(phi: [f64; 2], score_change: f64) -> Option<f64> {
    if phi[1].abs() < 1e-6 * score_change.abs() {
        return None;
    }
    Some(phi[0] / phi[1]).filter(|r| r.is_finite())
}

/// For every seed and background count: sample the data, train, pick the
/// centerline points and attribute each against the Gaussian-only samples
/// with both methods. Rows are ordered by seed, background count, point,
/// method.
pub fn run_ratio_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    if cfg.seeds.is_empty() || cfg.background_counts.is_empty() {
        return Err(Error::InvalidInput("experiment needs at least one seed and background count".into()));
    }
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let data_seed = cfg.data_seed.unwrap_or(seed);
        let gaussian = gen_double_gaussian(&cfg.gaussians, cfg.n_per_gaussian, &cfg.field, derive_seed(data_seed, 0))?;
        let refs = ReferenceSet::new(gaussian.iter().map(|s| s.x.to_vec()).collect())?;
        let selection = select_centerline_points(&gaussian, cfg.k, cfg.band)?;
        for &background_n in &cfg.background_counts {
            let mut data: Vec<LabeledSample> = gaussian.clone();
            data.extend(gen_uniform_background(
                background_n,
                &cfg.bounds,
                &cfg.field,
                derive_seed(data_seed, 1),
            )?);
            let trainer = TrainerConfig {
                seed: derive_seed(seed, 2),
                execution: cfg.execution,
                ..cfg.trainer
            };
            let model = Model::Trees(train_extra_trees(&data, &trainer)?);
            let jobs: Vec<(usize, ExperimentMethod)> = (0..selection.points.len())
                .flat_map(|p| ExperimentMethod::ALL.map(|m| (p, m)))
                .collect();
            let expectation = ExpectationConfig {
                target_stderr: cfg.target_stderr,
                shuffle_seed: derive_seed(seed, 3),
                execution: Execution::Sequential,
                ..Default::default()
            };
            rows.extend(map_ordered(cfg.execution, &jobs, |_, &(point_idx, method)| {
                let x = selection.points[point_idx];
                let report = match method {
                    ExperimentMethod::Gig => {
                        expected_attribution(|r, e| gig_attribute(&model, r, e, &cfg.gig), &refs, &x, &expectation)
                    }
                    ExperimentMethod::ShapleyExact => {
                        expected_attribution(|r, e| shapley_exact(&model, r, e), &refs, &x, &expectation)
                    }
                };
                let mut row = ExperimentRow {
                    background_n,
                    seed,
                    point_idx,
                    x,
                    method,
                    phi: [f64::NAN; 2],
                    ratio: None,
                    stderr: None,
                    efficiency_residual: f64::NAN,
                    converged: false,
                    error: None,
                };
                match report {
                    Ok(rep) => {
                        row.phi = [rep.mean_phi[0], rep.mean_phi[1]];
                        let change = row.phi[0] + row.phi[1] - rep.efficiency_residual;
                        row.ratio = ratio(row.phi, change);
                        row.stderr = rep.stderr_phi.map(|s| [s[0], s[1]]);
                        row.efficiency_residual = rep.efficiency_residual;
                        row.converged = rep.converged;
                        if rep.n_failed > 0 {
                            row.error = Some(format!("{} references failed", rep.n_failed));
                        }
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                row
            }));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSummary {
    pub background_n: usize,
    pub seed: u64,
    pub method: ExperimentMethod,
    pub median: f64,
    pub max: f64,
    pub n_stable: usize,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Median and maximum stable ratio per (seed, background count, method),
/// in first-appearance order.
pub fn summarize_ratios(rows: &[ExperimentRow]) -> Vec<RatioSummary> {
    let mut keys: Vec<(u64, usize, ExperimentMethod)> = Vec::new();
    for r in rows {
        let key = (r.seed, r.background_n, r.method);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(seed, background_n, method)| {
            let ratios: Vec<f64> = rows
                .iter()
                .filter(|r| (r.seed, r.background_n, r.method) == (seed, background_n, method))
                .filter_map(|r| r.ratio)
                .collect();
            RatioSummary {
                background_n,
                seed,
                method,
                median: median(&ratios),
                max: ratios.iter().copied().fold(f64::NAN, f64::max),
                n_stable: ratios.len(),
            }
        })
        .collect()
}
