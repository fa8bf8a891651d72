//! Matrix-product states and operators.
//!
//! Site tensors are rank 3 with index order `(left bond, physical, right bond)`;
//! MPO tensors are rank 4 with order `(left bond, right bond, out, in)`.
//! The physical basis is `|0⟩ = |↑⟩`, `|1⟩ = |↓⟩` (eigenbasis of `σᶻ`).

mod checkpoint;
pub mod env;
mod linalg;
mod measure;
mod mpo;
mod state;

pub use checkpoint::{read_checkpoint, write_checkpoint, AnyMps};
pub use linalg::{lq_thin, qr_thin, truncated_svd, TruncatedSvd};
pub use measure::{
    bond_entropies, bond_entropies_from_right, entropy_from_singular_values, two_point_correlation, MeasureCache,
};
pub use mpo::Mpo;
pub use state::{Mps, SplitInfo};

use num_complex::Complex64;
use rand::Rng;

/// Physical dimension of a spin-½ site.
pub const PHYS_DIM: usize = 2;

/// Scalar type of a run: real for ground states, complex for dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ScalarKind {
    Real,
    Complex,
}

/// Tensor element type (`f64` or `Complex64`).
pub trait Scalar:
    ndarray_linalg::Scalar<Real = f64, Complex = Complex64>
    + ndarray_linalg::Lapack
    + ndarray::LinalgScalar
    + Send
    + Sync
{
    const KIND: ScalarKind;

    /// Exact conversion from a complex number, `None` if it has an imaginary part
    /// and `Self` is real.
    fn from_c64(z: Complex64) -> Option<Self>;

    fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Real;

    fn from_c64(z: Complex64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }

    fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen_range(-1.0..1.0)
    }
}

impl Scalar for Complex64 {
    const KIND: ScalarKind = ScalarKind::Complex;

    fn from_c64(z: Complex64) -> Option<Self> {
        Some(z)
    }

    fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }
}
