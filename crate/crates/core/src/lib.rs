//! Pseudospectral simulation and verification workbench for the periodic
//! modified Benjamin–Ono equation
//!
//! ```text
//! ∂_t u + H∂_x²u = ∓u²u_x,   x ∈ ℝ/2πℤ
//! ```
//!
//! and for the gauge transform `v = P₊(e^{-iF}u)` used to study it in the
//! energy space. The crate is organized bottom-up:
//!
//! - [`spectral`]: periodic fields, Fourier multipliers, projections,
//!   Littlewood–Paley blocks and dealiased products.
//! - [`equations`]: right-hand sides, conserved quantities, trajectories and
//!   the translation map to the Wicked-order equation.
//! - [`gauge`]: the primitive `F`, the factors `e^{ikF}`, the gauge
//!   transform, its commutator and the equation the gauged unknown solves.
//! - [`integrator`]: integrating-factor RK4 time stepping.
//! - [`norms`]: Sobolev, Lebesgue and Bourgain-type norms on discrete data.
//! - [`verify`]: diagnostics reports for every identity, conservation law
//!   and estimate probe.
//! - [`config`] and [`io`]: run configuration and persistence used by the
//!   `mbo-gauge` binary.

pub mod config;
pub mod equations;
pub mod error;
pub mod gauge;
pub mod integrator;
pub mod io;
pub mod norms;
pub mod random;
pub mod spectral;
#[cfg(test)]
mod sparse_oracle;
pub mod verify;

pub use error::{Error, Result};
pub use spectral::{Complex64, Grid, PeriodicField, Projection};
