//! First-passage-time analysis for one-dimensional diffusions.
//!
//! The crate is organised around four layers:
//!
//! - [`diffusion`]: deterministic mathematics. Diffusion models and their
//!   unit-diffusion (Lamperti) form, boundaries, and every closed-form
//!   density or probability used elsewhere (Gaussian kernel, linear-boundary
//!   bridge non-crossing probability, Kendall's identity, the Daniels
//!   boundary family, meander densities).
//! - [`sim`]: seeded Monte Carlo. Brownian bridges and meanders, the
//!   Girsanov-weighted conditional non-crossing estimator, the regression
//!   estimator of the crossing-asymptotic coefficient `f(t, x)`, and
//!   Euler–Maruyama first-passage sampling.
//! - [`fpt`]: density identities linking `f(t, x)` and transition densities to
//!   first-passage densities, for free and pinned processes, and empirical
//!   density curves.
//! - [`gateaux`]: the directional derivative of the boundary non-crossing
//!   probability, by quadrature over the first-passage law combined with
//!   meander Monte Carlo.
//!
//! Monte-Carlo routines draw every path from its own random stream keyed by
//! `(seed, path index)`, so results do not depend on the rayon thread count.

pub mod diffusion;
pub mod error;
pub mod fpt;
pub mod gateaux;
pub mod normal;
pub mod quadrature;
pub mod sim;
mod sum;

pub use error::{Error, Result};
