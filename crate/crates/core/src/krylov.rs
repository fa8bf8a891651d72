//! Matrix-free Krylov solvers for Hermitian operators.
//!
//! Both routines keep the full Lanczos basis and reorthogonalize every new
//! vector against it, trading memory for robustness. The Krylov dimensions
//! used by DMRG, TDVP and the exact oracle are small (tens of vectors).

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::mps::Scalar;
use crate::{Error, Result};

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn vdot<T: Scalar>(a: &Array1<T>, b: &Array1<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (&x, &y)| acc + x.conj() * y)
}

pub fn norm<T: Scalar>(a: &Array1<T>) -> f64 {
    a.iter().map(|x| x.square()).sum::<f64>().sqrt()
}

fn orthogonalize<T: Scalar>(w: &mut Array1<T>, against: &[Array1<T>]) {
    for _ in 0..2 {
        for q in against {
            let c = vdot(q, w);
            w.scaled_add(-c, q);
        }
    }
}

/// Eigen-decomposition of the symmetric tridiagonal matrix `(alpha, beta)`.
fn tridiagonal_eigh(alpha: &[f64], beta: &[f64]) -> Result<(Array1<f64>, Array2<f64>)> {
    let m = alpha.len();
    let mut t = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        t[[i, i]] = alpha[i];
        if i + 1 < m {
            t[[i, i + 1]] = beta[i];
            t[[i + 1, i]] = beta[i];
        }
    }
    Ok(t.eigh(UPLO::Lower)?)
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov dimension before a restart.
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Target residual norm `‖H x − E x‖`.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_krylov: 40, max_restarts: 50, tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair<T> {
    pub value: f64,
    pub vector: Array1<T>,
    pub residual: f64,
    pub matvecs: usize,
    pub converged: bool,
}

/// Deterministic fallback start vector.
fn fallback_start<T: Scalar>(n: usize) -> Array1<T> {
    Array1::from_shape_fn(n, |i| T::from_real(1.0 + ((i * 7919) % 101) as f64 / 101.0))
}

/// Lowest eigenpair of a Hermitian operator restricted to the orthogonal
/// complement of `deflate` (which must be orthonormal).
pub fn lowest_eigenpair<T, F>(
    apply: F,
    start: &Array1<T>,
    deflate: &[Array1<T>],
    opts: &LanczosOptions,
) -> Result<Eigenpair<T>>
where
    T: Scalar,
    F: Fn(&Array1<T>) -> Array1<T>,
{
    let n = start.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty start vector".into()));
    }
    let mut x = start.clone();
    orthogonalize(&mut x, deflate);
    if norm(&x) < 1e-12 {
        x = fallback_start(n);
        orthogonalize(&mut x, deflate);
    }
    let nx = norm(&x);
    if nx < 1e-300 {
        return Err(Error::InvalidInput("deflation space covers the whole space".into()));
    }
    x.mapv_inplace(|v| v * T::from_real(1.0 / nx));
    let mut matvecs = 0;
    let mut best = Eigenpair { value: f64::INFINITY, vector: x.clone(), residual: f64::INFINITY, matvecs, converged: false };
    let max_krylov = opts.max_krylov.max(2).min(n.saturating_sub(deflate.len()).max(1));
    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<Array1<T>> = vec![x.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut finished = false;
        let mut ritz = (0.0, Array1::<f64>::zeros(1), f64::INFINITY);
        for j in 0..max_krylov {
            let mut w = apply(&basis[j]);
            matvecs += 1;
            orthogonalize(&mut w, deflate);
            let a = vdot(&basis[j], &w).re();
            alpha.push(a);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            let (vals, vecs) = tridiagonal_eigh(&alpha, &beta)?;
            let y = vecs.column(0).to_owned();
            let res = b * y[j].abs();
            ritz = (vals[0], y, res);
            let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if res < opts.tol || b < 1e-14 * scale {
                finished = true;
                break;
            }
            if j + 1 < max_krylov {
                w.mapv_inplace(|v| v * T::from_real(1.0 / b));
                beta.push(b);
                basis.push(w);
            }
        }
        let (value, y, res) = ritz;
        let mut v = Array1::<T>::zeros(n);
        for (c, q) in y.iter().zip(&basis) {
            v.scaled_add(T::from_real(*c), q);
        }
        let nv = norm(&v);
        v.mapv_inplace(|z| z * T::from_real(1.0 / nv));
        best = Eigenpair { value, vector: v.clone(), residual: res, matvecs, converged: finished };
        if finished {
            return Ok(best);
        }
        x = v;
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy)]
pub struct ExpmOptions {
    pub max_krylov: usize,
    /// Bound on the estimated error of the result vector (2-norm).
    pub tol: f64,
}

impl Default for ExpmOptions {
    fn default() -> Self {
        Self { max_krylov: 60, tol: 1e-12 }
    }
}

/// `exp(z H) v` for Hermitian `H` and complex `z`.
///
/// Fails with [`Error::NotConverged`] when the a-posteriori error estimate
/// stays above `tol` at the maximal Krylov dimension.
pub fn expm_apply<F>(apply: F, v: &Array1<Complex64>, z: Complex64, opts: &ExpmOptions) -> Result<(Array1<Complex64>, usize)>
where
    F: Fn(&Array1<Complex64>) -> Array1<Complex64>,
{
    let n = v.len();
    let nv = norm(v);
    if nv == 0.0 {
        return Ok((v.clone(), 0));
    }
    let max_krylov = opts.max_krylov.max(1).min(n);
    let mut basis = vec![v.mapv(|x| x / nv)];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for j in 0..max_krylov {
        let mut w = apply(&basis[j]);
        alpha.push(vdot(&basis[j], &w).re);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let (vals, vecs) = tridiagonal_eigh(&alpha, &beta)?;
        // c = Y exp(z Θ) Yᵀ e₁
        let m = alpha.len();
        let mut c = Array1::<Complex64>::zeros(m);
        for k in 0..m {
            let weight = (z * vals[k]).exp() * vecs[[0, k]];
            for i in 0..m {
                c[i] += weight * vecs[[i, k]];
            }
        }
        let scale = vals.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        let err = b * c[m - 1].norm() * nv;
        let breakdown = b < 1e-14 * scale;
        if err < opts.tol || breakdown || m == n {
            let mut out = Array1::<Complex64>::zeros(n);
            for (ci, q) in c.iter().zip(&basis) {
                out.scaled_add(*ci * nv, q);
            }
            return Ok((out, m));
        }
        if j + 1 == max_krylov {
            return Err(Error::NotConverged(format!(
                "Krylov exponential: error estimate {err:.2e} after {m} vectors"
            )));
        }
        beta.push(b);
        basis.push(w.mapv(|x| x / b));
    }
    unreachable!("loop returns on its last iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray_linalg::Eigh;

    fn test_matrix(n: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, n), |(i, j)| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            if i == j {
                (i as f64).sin() * 3.0
            } else {
                ((a + 1.0) * (b + 2.0)).cos() / (1.0 + (b - a))
            }
        })
    }

    #[test]
    fn lowest_matches_dense() {
        let h = test_matrix(60);
        let (vals, _) = h.eigh(UPLO::Lower).unwrap();
        let start = Array1::from_elem(60, 1.0);
        let opts = LanczosOptions { tol: 1e-11, ..Default::default() };
        let ep = lowest_eigenpair(|x| h.dot(x), &start, &[], &opts).unwrap();
        assert!(ep.converged);
        assert!((ep.value - vals[0]).abs() < 1e-10);
        let first = ep.vector.clone();
        let ep2 = lowest_eigenpair(|x| h.dot(x), &start, &[first], &opts).unwrap();
        assert!((ep2.value - vals[1]).abs() < 1e-10);
    }

    #[test]
    fn expm_matches_dense() {
        let h = test_matrix(30);
        let (vals, vecs) = h.eigh(UPLO::Lower).unwrap();
        let v = Array1::from_shape_fn(30, |i| Complex64::new((i as f64).cos(), 0.3));
        let z = Complex64::new(0.0, -0.7);
        let hc = h.mapv(Complex64::from);
        let (out, _) = expm_apply(|x| hc.dot(x), &v, z, &ExpmOptions::default()).unwrap();
        let vc = vecs.mapv(Complex64::from);
        let coeffs = vc.t().dot(&v);
        let evolved = Array1::from_shape_fn(30, |k| coeffs[k] * (z * vals[k]).exp());
        let exact = vc.dot(&evolved);
        assert!((out - exact).iter().all(|d| d.norm() < 1e-11));
    }
}
