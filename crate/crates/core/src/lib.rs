//! Desk-scale numerics for weighted spaces of entire functions over cones.
//!
//! The crate is organised bottom-up:
//!
//! * [`profiles`]: the index functions `alpha`, `beta` and their admissibility checks.
//! * [`cones`]: cones in `R^k` under the uniform norm (exact for `k <= 2`).
//! * [`numerics`]: grids, sampled fields, quadrature, finite-difference `dbar`, circle means.
//! * [`weights`]: the weight `rho_{U,A,B}`, sup and Hilbert norms, growth-gap and shift checks.
//! * [`psh`]: plurisubharmonic surrogates (`Theta_a`, `sigma_R`, seed envelopes, `rho_R`).
//! * [`dbar`]: Cauchy transform and weighted minimal-norm solutions of `dbar psi = eta`.
//! * [`decompose`]: partitions of unity, splitting `f = f1 + f2`, and the density experiment.
//! * [`config`], [`report`], [`pipelines`]: scenario files, CSV reports, and the runners
//!   behind the `ccl` binary.
//!
//! The norm on `C^k` and `R^k` is the uniform norm `|z| = max_j |z_j|` everywhere.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cones;
pub mod config;
pub mod dbar;
pub mod decompose;
mod error;
pub mod numerics;
pub mod pipelines;
pub mod profiles;
pub mod psh;
pub mod report;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
