use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::transform::FeatureMap;

use super::Model;

/// Univariate polynomial in powers of `(x - origin)`, ascending order.
///
/// Storing the expansion point keeps high-degree centerlines such as
/// `-(4(x - 1/2))^11 - x + 1` exact at their center.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub origin: f64,
    pub coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(origin: f64, coefficients: Vec<f64>) -> Self {
        Polynomial {
            origin,
            coefficients,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.origin;
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let t = x - self.origin;
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * t + k as f64 * c)
    }
}

#[derive(Clone)]
pub enum AnalyticForm {
    /// `bias + Σ w_i x_i`
    Linear { weights: Vec<f64>, bias: f64 },
    /// `Σ p_i(x_i)`
    Separable { terms: Vec<Polynomial> },
    /// `Σ_i Σ_j m_ij x_i x_j`
    Bilinear { matrix: Vec<Vec<f64>> },
    /// Two-feature probability field `1/2 + 1/2 tanh((x_2 - c(x_1)) / delta)`.
    TanhField { delta: f64, centerline: Polynomial },
    /// `Σ c_k g_k(x)`; sub-models may be tree ensembles.
    LinearCombination { terms: Vec<(f64, Model)> },
    /// `inner(x)` with feature `feature` replaced by `map.inverse(x_feature)`.
    Reparametrized {
        inner: Box<AnalyticModel>,
        feature: usize,
        map: Arc<dyn FeatureMap>,
    },
}

impl std::fmt::Debug for AnalyticForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnalyticForm::Linear { weights, bias } => f
                .debug_struct("Linear")
                .field("weights", weights)
                .field("bias", bias)
                .finish(),
            AnalyticForm::Separable { terms } => {
                f.debug_struct("Separable").field("terms", terms).finish()
            }
            AnalyticForm::Bilinear { matrix } => {
                f.debug_struct("Bilinear").field("matrix", matrix).finish()
            }
            AnalyticForm::TanhField { delta, centerline } => f
                .debug_struct("TanhField")
                .field("delta", delta)
                .field("centerline", centerline)
                .finish(),
            AnalyticForm::LinearCombination { terms } => f
                .debug_struct("LinearCombination")
                .field("terms", terms)
                .finish(),
            AnalyticForm::Reparametrized {
                inner,
                feature,
                map,
            } => f
                .debug_struct("Reparametrized")
                .field("inner", inner)
                .field("feature", feature)
                .field("map", &map.name())
                .finish(),
        }
    }
}

/// Closed-form scoring function with an exact gradient.
#[derive(Debug, Clone)]
pub struct AnalyticModel {
    n_features: usize,
    form: AnalyticForm,
}

impl AnalyticModel {
    pub fn linear(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("linear model needs weights".into()));
        }
        Ok(AnalyticModel {
            n_features: weights.len(),
            form: AnalyticForm::Linear { weights, bias },
        })
    }

    pub fn separable(terms: Vec<Polynomial>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("separable model needs terms".into()));
        }
        Ok(AnalyticModel {
            n_features: terms.len(),
            form: AnalyticForm::Separable { terms },
        })
    }

    pub fn bilinear(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput(
                "bilinear matrix must be square and non-empty".into(),
            ));
        }
        Ok(AnalyticModel {
            n_features: n,
            form: AnalyticForm::Bilinear { matrix },
        })
    }

    pub fn tanh_field(delta: f64, centerline: Polynomial) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tanh field width must be positive, got {delta}"
            )));
        }
        Ok(AnalyticModel {
            n_features: 2,
            form: AnalyticForm::TanhField { delta, centerline },
        })
    }

    pub fn linear_combination(terms: Vec<(f64, Model)>) -> Result<Self> {
        let n = match terms.first() {
            Some((_, m)) => m.n_features(),
            None => {
                return Err(Error::InvalidInput(
                    "linear combination needs at least one term".into(),
                ))
            }
        };
        for (_, m) in &terms {
            check_dim(n, m.n_features())?;
        }
        Ok(AnalyticModel {
            n_features: n,
            form: AnalyticForm::LinearCombination { terms },
        })
    }

    pub(crate) fn reparametrized(
        inner: AnalyticModel,
        feature: usize,
        map: Arc<dyn FeatureMap>,
    ) -> Self {
        AnalyticModel {
            n_features: inner.n_features,
            form: AnalyticForm::Reparametrized {
                inner: Box::new(inner),
                feature,
                map,
            },
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn form(&self) -> &AnalyticForm {
        &self.form
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n_features, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.form {
            AnalyticForm::Linear { weights, bias } => {
                bias + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            }
            AnalyticForm::Separable { terms } => {
                terms.iter().zip(x).map(|(p, &v)| p.eval(v)).sum()
            }
            AnalyticForm::Bilinear { matrix } => matrix
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    x[i] * row.iter().zip(x).map(|(m, v)| m * v).sum::<f64>()
                })
                .sum(),
            AnalyticForm::TanhField { delta, centerline } => {
                0.5 + 0.5 * ((x[1] - centerline.eval(x[0])) / delta).tanh()
            }
            AnalyticForm::LinearCombination { terms } => terms
                .iter()
                .map(|(c, m)| c * m.eval_unchecked(x))
                .sum(),
            AnalyticForm::Reparametrized {
                inner,
                feature,
                map,
            } => {
                let mut y = x.to_vec();
                y[*feature] = map.inverse(x[*feature]);
                inner.eval_unchecked(&y)
            }
        }
    }

    /// Exact gradient. Fails if a linear combination contains a tree ensemble.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_features, x.len())?;
        let mut out = vec![0.0; self.n_features];
        self.add_grad(x, 1.0, &mut out)?;
        Ok(out)
    }

    fn add_grad(&self, x: &[f64], scale: f64, out: &mut [f64]) -> Result<()> {
        match &self.form {
            AnalyticForm::Linear { weights, .. } => {
                for (o, w) in out.iter_mut().zip(weights) {
                    *o += scale * w;
                }
            }
            AnalyticForm::Separable { terms } => {
                for ((o, p), &v) in out.iter_mut().zip(terms).zip(x) {
                    *o += scale * p.derivative(v);
                }
            }
            AnalyticForm::Bilinear { matrix } => {
                let n = matrix.len();
                for k in 0..n {
                    let mut g = 0.0;
                    for j in 0..n {
                        g += (matrix[k][j] + matrix[j][k]) * x[j];
                    }
                    out[k] += scale * g;
                }
            }
            AnalyticForm::TanhField { delta, centerline } => {
                let u = (x[1] - centerline.eval(x[0])) / delta;
                let sech = 1.0 / u.cosh();
                let dp = 0.5 * sech * sech / delta;
                out[0] -= scale * dp * centerline.derivative(x[0]);
                out[1] += scale * dp;
            }
            AnalyticForm::LinearCombination { terms } => {
                for (c, m) in terms {
                    match m {
                        Model::Analytic(a) => a.add_grad(x, scale * c, out)?,
                        Model::Trees(_) => {
                            return Err(Error::Unsupported(
                                "gradient of a combination containing a tree ensemble".into(),
                            ))
                        }
                    }
                }
            }
            AnalyticForm::Reparametrized {
                inner,
                feature,
                map,
            } => {
                let mut y = x.to_vec();
                y[*feature] = map.inverse(x[*feature]);
                let mut g = vec![0.0; out.len()];
                inner.add_grad(&y, 1.0, &mut g)?;
                g[*feature] *= map.inverse_derivative(x[*feature]);
                for (o, v) in out.iter_mut().zip(g) {
                    *o += scale * v;
                }
            }
        }
        Ok(())
    }

    /// `∂²f/∂x_i∂x_j` when it is the same everywhere, `None` otherwise.
    pub fn constant_mixed_partial(&self, i: usize, j: usize) -> Option<f64> {
        if i >= self.n_features || j >= self.n_features || i == j {
            return None;
        }
        match &self.form {
            AnalyticForm::Linear { .. } | AnalyticForm::Separable { .. } => Some(0.0),
            AnalyticForm::Bilinear { matrix } => Some(matrix[i][j] + matrix[j][i]),
            AnalyticForm::LinearCombination { terms } => {
                terms.iter().try_fold(0.0, |acc, (c, m)| match m {
                    Model::Analytic(a) => Some(acc + c * a.constant_mixed_partial(i, j)?),
                    Model::Trees(_) => None,
                })
            }
            AnalyticForm::TanhField { .. } | AnalyticForm::Reparametrized { .. } => None,
        }
    }
}
