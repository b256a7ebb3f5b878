use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Straight-line path integral with Shapley credit at discontinuities.
    Gig,
    /// Path integral along an arbitrary piecewise-linear path.
    PathIntegral,
    ShapleyExact,
    ShapleyPermutation,
    ShapleySampled,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gig => "gig",
            Method::PathIntegral => "path-integral",
            Method::ShapleyExact => "shapley-exact",
            Method::ShapleyPermutation => "shapley-permutation",
            Method::ShapleySampled => "shapley-sampled",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-feature credits for the score change between two points.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionResult {
    pub phi: Vec<f64>,
    /// `Σφ - (f(x_expl) - f(x_ref))`
    pub efficiency_residual: f64,
    pub method: Method,
    /// Per-feature standard errors for sampled estimators.
    pub stderr: Option<Vec<f64>>,
}

impl AttributionResult {
    pub(crate) fn new(phi: Vec<f64>, score_change: f64, method: Method) -> Self {
        let efficiency_residual = phi.iter().sum::<f64>() - score_change;
        AttributionResult {
            phi,
            efficiency_residual,
            method,
            stderr: None,
        }
    }
}
