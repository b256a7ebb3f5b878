//! Generalized Integrated Gradients.
//!
//! Straight-line path attribution for models whose discontinuities are
//! hyperplanes orthogonal to the features (decision trees), combined with
//! ordinary integrated gradients for the differentiable parts.

mod attribute;
mod merge;
mod orthant;
mod splits;
mod theorem;

pub use attribute::{attribute_along_path, gig_attribute, segment_list, GigConfig, DEFAULT_CORNER_LIMIT};
pub use merge::{coincident, merge_ensemble_splits, SegmentList, ALPHA_ABS_TOL, ALPHA_REL_TOL};
pub use orthant::{orthant_shapley, Corner, ThresholdIndex};
pub use splits::{find_path_tree_splits, SplitEvent, TreeSplits};
pub use theorem::{theorem_gap, TheoremGap};
