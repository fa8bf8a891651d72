//! Exact reference computations for small systems.
//!
//! Operators act on the full `2^N` space through bit masks; spectra come from
//! dense diagonalization (`N ≤ 10`) or deflated Lanczos, and time evolution
//! from Krylov exponentials on midpoint-frozen Hamiltonians. The free-fermion
//! solution of the open chain lives in [`free_fermion`]; an independently
//! written Hamiltonian builder lives in [`reference`].

pub mod free_fermion;
pub mod reference;

pub use free_fermion::{pfaffian, FreeFermionChain};

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64;

use crate::krylov::{expm_apply, lowest_eigenpair, norm, vdot, ExpmOptions, LanczosOptions};
use crate::mps::Scalar;
use crate::ops::PauliSum;
use crate::{Error, Result};

/// Largest system the oracle accepts.
pub const MAX_SITES: usize = 14;
const DENSE_EIGH_MAX: usize = 10;

pub fn check_size(n: usize) -> Result<()> {
    if n > MAX_SITES {
        return Err(Error::TooLarge { n, cap: MAX_SITES });
    }
    if n == 0 {
        return Err(Error::InvalidInput("zero sites".into()));
    }
    Ok(())
}

/// Matrix-free Pauli-sum operator on the full Hilbert space.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    n_sites: usize,
    terms: Vec<(usize, usize, f64)>,
}

impl DenseOperator {
    pub fn new(op: &PauliSum) -> Result<Self> {
        check_size(op.n_sites)?;
        let n = op.n_sites;
        let terms = op
            .simplified()
            .terms
            .iter()
            .map(|t| {
                let (flip, phase) = t.masks(n);
                (flip, phase, t.coef)
            })
            .collect();
        Ok(Self { n_sites: n, terms })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn apply<T: Scalar>(&self, v: &Array1<T>) -> Array1<T> {
        let mut out = Array1::<T>::zeros(v.len());
        for &(flip, phase, coef) in &self.terms {
            for (i, &x) in v.iter().enumerate() {
                let sign = if (i & phase).count_ones() % 2 == 0 { coef } else { -coef };
                out[i ^ flip] += x * T::from_real(sign);
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let d = self.dim();
        let mut m = Array2::<f64>::zeros((d, d));
        for &(flip, phase, coef) in &self.terms {
            for i in 0..d {
                let sign = if (i & phase).count_ones() % 2 == 0 { coef } else { -coef };
                m[[i ^ flip, i]] += sign;
            }
        }
        m
    }

    /// `⟨v|O|v⟩ / ⟨v|v⟩`.
    pub fn expectation<T: Scalar>(&self, v: &Array1<T>) -> f64 {
        vdot(v, &self.apply(v)).re() / vdot(v, v).re()
    }
}

/// Lowest eigenpairs in ascending order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Array1<f64>>,
    pub residuals: Vec<f64>,
}

/// Lowest `k` eigenpairs of a real Pauli sum.
pub fn dense_spectrum(op: &PauliSum, k: usize) -> Result<Spectrum> {
    let h = DenseOperator::new(op)?;
    let d = h.dim();
    if k == 0 || k > d {
        return Err(Error::InvalidInput(format!("cannot compute {k} eigenpairs of a {d}-dim space")));
    }
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Array1<f64>> = Vec::with_capacity(k);
    if op.n_sites <= DENSE_EIGH_MAX {
        let (vals, vecs) = h.to_dense().eigh(UPLO::Lower)?;
        for i in 0..k {
            values.push(vals[i]);
            vectors.push(vecs.column(i).to_owned());
        }
    } else {
        let opts = LanczosOptions { max_krylov: 80, max_restarts: 200, tol: 1e-11 };
        let start = Array1::from_shape_fn(d, |i| 1.0 + 0.5 * ((i as f64) * 0.618).sin());
        for _ in 0..k {
            let ep = lowest_eigenpair(|v| h.apply(v), &start, &vectors, &opts)?;
            if !ep.converged {
                return Err(Error::NotConverged(format!("Lanczos residual {:.2e}", ep.residual)));
            }
            values.push(ep.value);
            vectors.push(ep.vector);
        }
        // deflation can return near-degenerate pairs out of order
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        values = order.iter().map(|&i| values[i]).collect();
        vectors = order.iter().map(|&i| vectors[i].clone()).collect();
    }
    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(&e, v)| {
            let mut r = h.apply(v);
            r.scaled_add(-e, v);
            norm(&r)
        })
        .collect();
    Ok(Spectrum { values, vectors, residuals })
}

/// Time-ordered evolution `T exp(-i ∫ H(t) dt)` from `t0` to `t1`.
///
/// The interval is cut into micro-steps no longer than `dt_micro`. Each step
/// is the fourth-order commutator-free Magnus product of two exponentials
/// built from the Hamiltonian at the two Gauss–Legendre nodes.
pub fn krylov_evolve<F>(state: &Array1<Complex64>, hamiltonian_at: F, t0: f64, t1: f64, dt_micro: f64) -> Result<Array1<Complex64>>
where
    F: Fn(f64) -> Result<PauliSum>,
{
    if !(dt_micro > 0.0) || !(t1 >= t0) {
        return Err(Error::InvalidInput("krylov_evolve needs dt_micro > 0 and t1 >= t0".into()));
    }
    let steps = ((t1 - t0) / dt_micro).ceil() as usize;
    let mut psi = state.clone();
    if steps == 0 {
        return Ok(psi);
    }
    let h = (t1 - t0) / steps as f64;
    let opts = ExpmOptions { max_krylov: 80, tol: 1e-13 };
    let r3 = 3f64.sqrt();
    let (node1, node2) = (0.5 - r3 / 6.0, 0.5 + r3 / 6.0);
    let (heavy, light) = ((3.0 + 2.0 * r3) / 12.0, (3.0 - 2.0 * r3) / 12.0);
    for s in 0..steps {
        let start = t0 + s as f64 * h;
        let early = DenseOperator::new(&hamiltonian_at(start + node1 * h)?)?;
        let late = DenseOperator::new(&hamiltonian_at(start + node2 * h)?)?;
        for (we, wl) in [(heavy, light), (light, heavy)] {
            let apply = |v: &Array1<Complex64>| {
                let mut out = early.apply(v);
                out.mapv_inplace(|z| z * we);
                out.scaled_add(Complex64::from(wl), &late.apply(v));
                out
            };
            let (next, _) = expm_apply(apply, &psi, Complex64::new(0.0, -h), &opts)?;
            psi = next;
        }
    }
    Ok(psi)
}

/// Von Neumann entropy of a dense state cut after `bond + 1` sites.
pub fn dense_entropy<T: Scalar>(psi: &Array1<T>, n: usize, bond: usize) -> Result<f64> {
    if bond + 1 >= n {
        return Err(Error::InvalidInput(format!("bond {bond} out of range")));
    }
    let rows = 1usize << (bond + 1);
    let m = Array2::from_shape_vec((rows, psi.len() / rows), psi.to_vec())?;
    let (_, s, _) = m.svd(false, false)?;
    Ok(crate::mps::entropy_from_singular_values(s.as_slice().unwrap()))
}

/// `⟨Π op⟩` of a single Pauli string on a dense state.
pub fn dense_string_expectation<T: Scalar>(psi: &Array1<T>, term: &crate::ops::PauliString) -> Result<f64> {
    let n = psi.len().trailing_zeros() as usize;
    let mut sum = PauliSum::new(n);
    sum.push(term.clone())?;
    Ok(DenseOperator::new(&sum)?.expectation(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{tfi_hamiltonian, uniform_fields, LatticeGeometry};

    #[test]
    fn two_site_spectrum() {
        let g = LatticeGeometry::chain(2).unwrap();
        let h = tfi_hamiltonian(&g, &[1.0, 1.0], 1.0).unwrap();
        let spec = dense_spectrum(&h, 4).unwrap();
        let s5 = 5f64.sqrt();
        for (a, b) in spec.values.iter().zip([-s5, -1.0, 1.0, s5]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(spec.residuals.iter().all(|&r| r < 1e-10));
    }

    #[test]
    fn single_site_field() {
        let mut h = PauliSum::new(1);
        h.push(crate::ops::PauliString::one(-0.8, 0, crate::ops::Pauli::Z)).unwrap();
        let spec = dense_spectrum(&h, 2).unwrap();
        assert!((spec.values[0] + 0.8).abs() < 1e-14 && (spec.values[1] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn lanczos_path_matches_dense_path() {
        let g = LatticeGeometry::cylinder(4, 3).unwrap();
        let h = tfi_hamiltonian(&g, &uniform_fields(&g, 3.0), 1.0).unwrap();
        let lanczos = dense_spectrum(&h, 2).unwrap();
        let full = DenseOperator::new(&h).unwrap().to_dense();
        let (vals, _) = full.eigh(UPLO::Lower).unwrap();
        assert!((lanczos.values[0] - vals[0]).abs() < 1e-9);
        assert!((lanczos.values[1] - vals[1]).abs() < 1e-9);
    }

    #[test]
    fn too_large_is_rejected() {
        let g = LatticeGeometry::cylinder(5, 3).unwrap();
        let h = tfi_hamiltonian(&g, &uniform_fields(&g, 1.0), 1.0).unwrap();
        assert!(matches!(DenseOperator::new(&h), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn field_only_evolution_is_product_of_rotations() {
        // H = -g Σ σᶻ; |+⟩ precesses: ⟨σˣ⟩ = cos(2 g t)
        let n = 3;
        let g = 0.7;
        let mut h = PauliSum::new(n);
        for k in 0..n {
            h.push(crate::ops::PauliString::one(-g, k, crate::ops::Pauli::Z)).unwrap();
        }
        let psi0 = Array1::from_elem(1 << n, Complex64::new((1.0 / 8f64).sqrt(), 0.0));
        let t = 1.3;
        let psi = krylov_evolve(&psi0, |_| Ok(h.clone()), 0.0, t, 0.1).unwrap();
        let x0 = crate::ops::PauliString::one(1.0, 0, crate::ops::Pauli::X);
        let sx = dense_string_expectation(&psi, &x0).unwrap();
        assert!((sx - (2.0 * g * t).cos()).abs() < 1e-11);
    }
}
