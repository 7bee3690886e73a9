//! Periodic grids, grid functions, spectral derivatives and discrete norms.
//!
//! The computational domain is the torus `[0, L)^dim` with `dim ∈ {1, 2}` and
//! `N` equispaced nodes per axis (`N` a power of two, for the FFT). All other
//! subsystems build on the types here: scalar/vector grid functions, the
//! spectral gradient/divergence, and the `L²`, `W^{s,2}` and `W^{1,∞}` norms.

mod grid;
pub mod norms;
pub mod snapshot;
pub mod spectral;

pub use grid::{Grid, ScalarField, VectorField};
pub use norms::{l2_norm, l2_norm_vec, lipschitz_norm, sobolev_norm, sobolev_norm_vec, sup_norm, NormReport};
pub use spectral::{dealias, derivative, divergence, gradient, laplacian};
