//! Feature attribution for tree ensembles and analytic models.
//!
//! The main entry points are [`gig_attribute`] (path integral along the
//! straight line, with discontinuities split by Shapley credit),
//! [`shapley_exact`] / [`shapley_sampled`] (interventional Shapley values)
//! and [`expected_attribution`] (averaging over a reference population).

pub mod attribution;
pub mod error;
pub mod exec;
pub mod gig;
pub mod model;
pub mod paths;
pub mod quadrature;
pub mod shapley;
pub mod stats;
pub mod synth;
pub mod throughput;
pub mod transform;

pub use attribution::{AttributionResult, Method};
pub use error::{Error, Result};
pub use exec::Execution;
pub use gig::{attribute_along_path, gig_attribute, GigConfig};
pub use model::{load_model, save_model, AnalyticModel, Model, TreeEnsemble};
pub use paths::{FeatureSubset, Path, PathKind};
pub use shapley::{
    expected_attribution, shapley_exact, shapley_permutation, shapley_sampled, ConvergenceReport,
    ExpectationConfig, ReferenceSet, SamplingConfig,
};
