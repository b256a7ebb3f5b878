//! The two-Gaussian toy problem: a tanh probability field, samplers, an
//! extremely-randomized-trees trainer, centerline point selection and the
//! attribution-ratio experiment.

mod centerline;
mod data;
mod experiment;
mod extra_trees;
mod field;

pub use centerline::{select_centerline_points, CenterlineSelection, DEFAULT_BAND, DEFAULT_K};
pub use data::{
    gen_double_gaussian, gen_uniform_background, Bounds, GaussianSpec, LabeledSample, Source,
};
pub use experiment::{
    median, run_ratio_experiment, summarize_ratios, ExperimentConfig, ExperimentMethod, ExperimentRow,
    RatioSummary, EXPERIMENT_CSV_HEADER,
};
pub use extra_trees::{train_extra_trees, TrainerConfig};
pub use field::{toy_probability, ToyFieldSpec};

/// Independent stream seed from a master seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
