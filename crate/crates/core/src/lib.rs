//! Simulator and diagnostics suite for the stochastic compressible barotropic
//! Euler system and its viscous (Navier-Stokes) counterpart on the periodic
//! torus, in one and two space dimensions.
//!
//! The crate is organised around six subsystems:
//!
//! * [`fields`] — periodic grids, grid functions, spectral derivatives and the
//!   discrete `L²` / `W^{s,2}` / `W^{1,∞}` norms everything else consumes.
//! * [`thermo`] — the barotropic pressure law `p(ρ) = a ρ^γ`, the pressure
//!   potential `H(ρ, r)` and the density ↔ sound-variable transform behind the
//!   symmetric-hyperbolic formulation.
//! * [`noise`] — a truncated cylindrical Wiener process with compactly
//!   supported mode coefficients, the smooth density cut-off, and counter-based
//!   Brownian increment streams that refine consistently across step sizes.
//! * [`dynamics`] — semi-discrete right-hand sides for both formulations and
//!   the viscous stress, a Heun + Euler-Maruyama splitting stepper with CFL
//!   control, stopping/blow-up detectors, and a finite-volume cross-check.
//! * [`diagnostics`] — the energy ledger, the relative energy functional with
//!   its remainder decomposition and certified bounds, and convergence metrics.
//! * [`harness`] — experiment orchestration: config parsing, initial-data
//!   recipes, the viscosity sweep on a shared Wiener path, Monte-Carlo
//!   aggregation, CSV/SVG output and the CLI.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod harness;
pub mod noise;
pub mod thermo;
pub mod util;

pub use error::{Error, Result};
