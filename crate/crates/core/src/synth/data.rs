use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use super::field::{toy_probability, ToyFieldSpec};
use crate::error::{Error, Result};

/// A Gaussian whose principal axes are the 45° and 135° diagonals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub mu: [f64; 2],
    pub sigma_major: f64,
    pub sigma_minor: f64,
}

impl GaussianSpec {
    pub fn new(mu: [f64; 2], sigma_major: f64, sigma_minor: f64) -> Result<Self> {
        if !(sigma_major > 0.0 && sigma_minor > 0.0) {
            return Err(Error::InvalidInput("Gaussian sigmas must be positive".into()));
        }
        Ok(GaussianSpec {
            mu,
            sigma_major,
            sigma_minor,
        })
    }

    /// The pair centred at (0,0) and (1,1) with sigmas 0.4 and 0.2.
    pub fn default_pair() -> [GaussianSpec; 2] {
        [
            GaussianSpec {
                mu: [0.0, 0.0],
                sigma_major: 0.4,
                sigma_minor: 0.2,
            },
            GaussianSpec {
                mu: [1.0, 1.0],
                sigma_major: 0.4,
                sigma_minor: 0.2,
            },
        ]
    }

    fn sample(&self, rng: &mut impl Rng) -> [f64; 2] {
        let u = self.sigma_major * rng.sample::<f64, _>(rand_distr::StandardNormal);
        let v = self.sigma_minor * rng.sample::<f64, _>(rand_distr::StandardNormal);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [self.mu[0] + r * (u - v), self.mu[1] + r * (u + v)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Gaussian0,
    Gaussian1,
    Uniform,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Gaussian0 => "gaussian0",
            Source::Gaussian1 => "gaussian1",
            Source::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian0" => Some(Source::Gaussian0),
            "gaussian1" => Some(Source::Gaussian1),
            "uniform" => Some(Source::Uniform),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub x: [f64; 2],
    /// 1 or 2.
    pub label: u8,
    pub source: Source,
}

fn label(field: &ToyFieldSpec, x: [f64; 2], rng: &mut impl Rng) -> u8 {
    if rng.gen::<f64>() < toy_probability(field, x) {
        2
    } else {
        1
    }
}

/// `n_per_gaussian` draws from each Gaussian (first, then second), labelled
/// by Bernoulli draws from the field.
pub fn gen_double_gaussian(
    specs: &[GaussianSpec; 2],
    n_per_gaussian: usize,
    field: &ToyFieldSpec,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    if n_per_gaussian == 0 {
        return Err(Error::InvalidInput("n_per_gaussian must be at least 1".into()));
    }
    field.validate()?;
    for s in specs {
        GaussianSpec::new(s.mu, s.sigma_major, s.sigma_minor)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * n_per_gaussian);
    for (spec, source) in specs.iter().zip([Source::Gaussian0, Source::Gaussian1]) {
        for _ in 0..n_per_gaussian {
            let x = spec.sample(&mut rng);
            let label = label(field, x, &mut rng);
            out.push(LabeledSample { x, label, source });
        }
    }
    Ok(out)
}

/// Axis-aligned box `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            lo: [-1.0, -1.0],
            hi: [2.0, 2.0],
        }
    }
}

pub fn gen_uniform_background(
    n: usize,
    bounds: &Bounds,
    field: &ToyFieldSpec,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    field.validate()?;
    for d in 0..2 {
        let (lo, hi) = (bounds.lo[d], bounds.hi[d]);
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!("degenerate bounds on axis {d}: [{lo}, {hi}]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = [
        rand_distr::Uniform::new(bounds.lo[0], bounds.hi[0]),
        rand_distr::Uniform::new(bounds.lo[1], bounds.hi[1]),
    ];
    Ok((0..n)
        .map(|_| {
            let x = [axes[0].sample(&mut rng), axes[1].sample(&mut rng)];
            let label = label(field, x, &mut rng);
            LabeledSample {
                x,
                label,
                source: Source::Uniform,
            }
        })
        .collect())
}
