//! Diffusion models, boundaries and closed-form densities.

mod boundary;
mod closed_form;
mod growth;
mod meander;
mod model;

pub use boundary::{daniels_boundary, daniels_value, Boundary, BoundaryKind, PiecewisePolynomial, PolyPiece};
pub use closed_form::{
    bm_transition_density, daniels_f, daniels_fpt_density, kendall_bm, kendall_fpt_density,
    linear_boundary_closed_forms, linear_fpt_cdf, linear_fpt_density, linear_noncross_prob,
    linear_survival, rescale_linear_to_unit_horizon,
};
pub(crate) use closed_form::linear_fpt_density_unchecked;
#[cfg(test)]
pub(crate) use closed_form::q;
pub use growth::{check_growth_condition, GrowthDiagnostic};
pub use meander::{meander_endpoint_density, meander_laplace, meander_transition_density};
pub use model::{lamperti_transform, DiffusionModel, Interval, RealFn, TransformedModel};
