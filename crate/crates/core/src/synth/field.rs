use crate::error::{Error, Result};
use crate::model::{AnalyticModel, Model, Polynomial};

/// `P(class 2 | x) = 1/2 + 1/2 tanh((x2 - c(x1)) / delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyFieldSpec {
    pub delta: f64,
    pub centerline: Polynomial,
}

impl Default for ToyFieldSpec {
    /// `delta = 1/8`, `c(x1) = -(4(x1 - 1/2))^11 - x1 + 1`.
    fn default() -> Self {
        let mut coefficients = vec![0.0; 12];
        coefficients[0] = 0.5;
        coefficients[1] = -1.0;
        coefficients[11] = -(4.0f64.powi(11));
        ToyFieldSpec {
            delta: 0.125,
            centerline: Polynomial::new(0.5, coefficients),
        }
    }
}

impl ToyFieldSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }

    /// The field as an analytic model.
    pub fn model(&self) -> Result<Model> {
        Ok(AnalyticModel::tanh_field(self.delta, self.centerline.clone())?.into())
    }
}

pub fn toy_probability(spec: &ToyFieldSpec, x: [f64; 2]) -> f64 {
    0.5 + 0.5 * ((x[1] - spec.centerline.eval(x[0])) / spec.delta).tanh()
}
