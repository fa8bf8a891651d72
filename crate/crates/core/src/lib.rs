//! Spatiotemporal quenches of the two-dimensional transverse-field Ising model
//! on cylinders.
//!
//! The crate is organized bottom-up:
//!
//! * [`lattice`]: cylinder geometry, quench front, Hamiltonian and local energy terms.
//! * [`mps`]: matrix-product states and operators, truncated SVD, measurements, checkpoints.
//! * [`krylov`]: Lanczos ground states and Krylov matrix exponentials.
//! * [`dmrg`]: two-site DMRG for ground states, gaps and spectral bandwidths.
//! * [`tdvp`]: two-site / one-site TDVP at second and fourth order.
//! * [`ed`]: exact diagonalization, exact time evolution and the free-fermion chain.
//! * [`heatwave`]: the analytic Doppler / heatwave model for superluminal fronts.
//! * [`quench`]: experiment orchestration (state preparation, quench, light cone).
//! * [`analysis`]: scaling collapses and fits.
//! * [`store`]: run configuration, CSV series, manifests and checkpoints.

// `!(x > 0.0)` is used on purpose to reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dmrg;
pub mod ed;
pub mod error;
pub mod heatwave;
pub mod krylov;
pub mod lattice;
pub mod mps;
pub mod ops;
pub mod quench;
pub mod store;
pub mod tdvp;

pub use error::{Error, Result};

/// Complex double precision scalar used for time evolution.
pub type C64 = num_complex::Complex64;
