//! Seeded Monte Carlo: Brownian bridges and meanders, the Girsanov-weighted
//! conditional non-crossing estimator, regression estimates of `f(t, x)`,
//! and Euler–Maruyama first-passage sampling.

mod crossing;
mod estimate;
mod grid;
mod paths;
mod stream;

pub use crossing::{sample_fpt, sample_fpt_original, sample_fpt_with};
pub use estimate::{
    default_offsets, estimate_cond_noncross_prob, estimate_cond_noncross_prob_with, estimate_f_regression,
    FEstimate, MCEstimate, RegressionOptions, RegressionPoint, SimOptions,
};
pub use grid::PathGrid;
pub use paths::{
    meander_endpoint, sample_brownian_bridge, sample_brownian_bridge_indexed, sample_meander,
    sample_meander_indexed, PathSample,
};
pub use stream::{path_rng, PathRng};

pub(crate) use paths::{draw_meander_endpoint, meander_path};
pub(crate) use stream::map_paths;
