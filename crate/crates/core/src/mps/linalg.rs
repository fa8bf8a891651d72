use ndarray::{s, Array, Array1, Array2, ArrayView, ArrayView2, Dimension, ShapeArg};
use ndarray_linalg::{JobSvd, QR, SVDDC, SVD};

use super::Scalar;
use crate::{Error, Result};

/// Copy an array (any layout) into a row-major `rows × cols` matrix.
pub(crate) fn to_matrix<T: Clone, D: Dimension>(a: ArrayView<T, D>, rows: usize, cols: usize) -> Array2<T> {
    let data = match a.as_slice() {
        Some(s) => s.to_vec(),
        None => a.iter().cloned().collect(),
    };
    Array2::from_shape_vec((rows, cols), data).expect("matrix reshape: element count mismatch")
}

/// Row-major reshape of an owned array of any memory layout.
pub(crate) fn reshape<T: Clone, D: Dimension, E: ShapeArg>(a: Array<T, D>, shape: E) -> Array<T, E::Dim> {
    let a = if a.is_standard_layout() { a } else { a.as_standard_layout().into_owned() };
    a.into_shape_with_order(shape).expect("reshape: element count mismatch")
}

pub(crate) fn conj_transpose<T: Scalar>(m: &ArrayView2<T>) -> Array2<T> {
    m.t().mapv(|x| x.conj())
}

/// Result of [`truncated_svd`]: `M ≈ U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd<T> {
    pub u: Array2<T>,
    pub s: Array1<f64>,
    pub vt: Array2<T>,
    /// Σ discarded s² / Σ s².
    pub discarded_weight: f64,
    /// The input was identically zero; the factorization is a rank-1 zero.
    pub zero: bool,
}

fn raw_svd<T: Scalar>(m: &ArrayView2<T>) -> Result<(Array2<T>, Array1<f64>, Array2<T>)> {
    let owned = m.to_owned();
    if let Ok((Some(u), s, Some(vt))) = owned.svddc(JobSvd::Some) {
        if s.iter().all(|x| x.is_finite()) {
            return Ok((u, s, vt));
        }
    }
    // divide-and-conquer occasionally fails on nearly degenerate spectra
    let (u, s, vt) = owned.svd(true, true)?;
    let (u, vt) = (u.expect("u requested"), vt.expect("vt requested"));
    let k = s.len();
    Ok((u.slice(s![.., ..k]).to_owned(), s, vt.slice(s![..k, ..]).to_owned()))
}

/// Singular value decomposition truncated to
/// `min(chi_max, #{s : s²/Σs² > cutoff})` values (at least one).
///
/// `cutoff == 0` keeps every singular value up to `chi_max`, including
/// exact zeros, so bond dimensions can be held at their maximal values.
pub fn truncated_svd<T: Scalar>(m: &ArrayView2<T>, chi_max: usize, cutoff: f64) -> Result<TruncatedSvd<T>> {
    if chi_max == 0 {
        return Err(Error::InvalidInput("chi_max must be at least 1".into()));
    }
    if !(cutoff >= 0.0) {
        return Err(Error::InvalidInput(format!("cutoff must be non-negative, got {cutoff}")));
    }
    if m.iter().any(|x| !x.re().is_finite() || !x.im().is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let (rows, cols) = m.dim();
    let (u, s, vt) = raw_svd(m)?;
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total == 0.0 {
        let mut u0 = Array2::zeros((rows, 1));
        u0[[0, 0]] = T::one();
        let mut v0 = Array2::zeros((1, cols));
        v0[[0, 0]] = T::one();
        return Ok(TruncatedSvd { u: u0, s: Array1::zeros(1), vt: v0, discarded_weight: 0.0, zero: true });
    }
    let keep = if cutoff > 0.0 {
        s.iter().filter(|&&x| x * x / total > cutoff).count().max(1)
    } else {
        s.len()
    }
    .min(chi_max);
    let discarded: f64 = s.iter().skip(keep).map(|x| x * x).sum::<f64>() / total;
    Ok(TruncatedSvd {
        u: u.slice(s![.., ..keep]).to_owned(),
        s: s.slice(s![..keep]).to_owned(),
        vt: vt.slice(s![..keep, ..]).to_owned(),
        discarded_weight: discarded,
        zero: false,
    })
}

/// Thin QR, `M = Q R` with `Q` of shape `rows × min(rows, cols)`.
pub fn qr_thin<T: Scalar>(m: &ArrayView2<T>) -> Result<(Array2<T>, Array2<T>)> {
    let (rows, cols) = m.dim();
    let k = rows.min(cols);
    let (q, r) = m.to_owned().qr()?;
    let q = q.slice(s![.., ..k]).to_owned();
    let r = r.slice(s![..k, ..]).to_owned();
    Ok((q, r))
}

/// Thin LQ, `M = L Q` with `Q` having orthonormal rows.
pub fn lq_thin<T: Scalar>(m: &ArrayView2<T>) -> Result<(Array2<T>, Array2<T>)> {
    let mh = conj_transpose(m);
    let (q, r) = qr_thin(&mh.view())?;
    Ok((conj_transpose(&r.view()), conj_transpose(&q.view())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_keeps_everything() {
        let id: Array2<f64> = Array2::eye(4);
        let svd = truncated_svd(&id.view(), 4, 1e-10).unwrap();
        assert_eq!(svd.s.len(), 4);
        assert!(svd.s.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert_eq!(svd.discarded_weight, 0.0);
    }

    #[test]
    fn rank_one_is_exact() {
        let a = ndarray::array![1.0, -2.0, 0.5];
        let b = ndarray::array![3.0, 1.0];
        let m = Array2::from_shape_fn((3, 2), |(i, j)| a[i] * b[j]);
        let svd = truncated_svd(&m.view(), 1, 1e-10).unwrap();
        let rebuilt = (&svd.u * &svd.s).dot(&svd.vt);
        assert!((rebuilt - &m).iter().all(|x| x.abs() < 1e-13));
        assert!(svd.discarded_weight < 1e-28);
    }

    #[test]
    fn planted_spectrum_discarded_weight() {
        // M = Q1 diag(σ) Q2ᵀ with orthogonal Q1, Q2 from QR of random matrices
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sigma = [4.0, 2.0, 1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125];
        let r1 = Array2::from_shape_fn((8, 8), |_| rng.gen_range(-1.0..1.0));
        let r2 = Array2::from_shape_fn((8, 8), |_| rng.gen_range(-1.0..1.0));
        let (q1, _) = qr_thin(&r1.view()).unwrap();
        let (q2, _) = qr_thin(&r2.view()).unwrap();
        let m = (&q1 * &Array1::from(sigma.to_vec())).dot(&q2.t());
        let svd = truncated_svd(&m.view(), 2, 1e-14).unwrap();
        let total: f64 = sigma.iter().map(|x| x * x).sum();
        let tail: f64 = sigma[2..].iter().map(|x| x * x).sum();
        assert_eq!(svd.s.len(), 2);
        assert!((svd.discarded_weight - tail / total).abs() < 1e-13);
        assert!((svd.s[0] - 4.0).abs() < 1e-12 && (svd.s[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_limits_rank() {
        let m = Array2::from_diag(&ndarray::array![1.0, 1e-3, 1e-8]);
        let svd = truncated_svd(&m.view(), 10, 1e-10).unwrap();
        assert_eq!(svd.s.len(), 2);
        let exact = truncated_svd(&m.view(), 10, 0.0).unwrap();
        assert_eq!(exact.s.len(), 3);
    }

    #[test]
    fn zero_matrix_flagged() {
        let m: Array2<f64> = Array2::zeros((3, 5));
        let svd = truncated_svd(&m.view(), 4, 1e-10).unwrap();
        assert!(svd.zero);
        assert_eq!(svd.u.dim(), (3, 1));
        assert_eq!(svd.vt.dim(), (1, 5));
    }

    #[test]
    fn lq_reconstructs() {
        let m = Array2::from_shape_fn((3, 7), |(i, j)| ((i * 5 + j * 3) % 7) as f64 - 3.0);
        let (l, q) = lq_thin(&m.view()).unwrap();
        assert!((l.dot(&q) - &m).iter().all(|x| x.abs() < 1e-12));
        let qqt = q.dot(&q.t());
        assert!((qqt - Array2::<f64>::eye(3)).iter().all(|x| x.abs() < 1e-12));
    }
}
