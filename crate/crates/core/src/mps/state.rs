use ndarray::{s, Array1, Array2, Array3, Array4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::env::left_overlap_update;
use super::linalg::{conj_transpose, lq_thin, qr_thin, reshape, to_matrix, truncated_svd};
use super::{Scalar, PHYS_DIM};
use crate::{Error, Result};

/// Open-boundary matrix-product state.
#[derive(Debug, Clone, PartialEq)]
pub struct Mps<T> {
    tensors: Vec<Array3<T>>,
    center: Option<usize>,
    truncation_error: f64,
    chi_max: usize,
}

/// Outcome of splitting a two-site tensor back into two site tensors.
#[derive(Debug, Clone)]
pub struct SplitInfo {
    pub singular_values: Array1<f64>,
    pub discarded_weight: f64,
}

impl<T: Scalar> Mps<T> {
    pub fn from_tensors(tensors: Vec<Array3<T>>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::InvalidInput("MPS needs at least one site".into()));
        }
        if tensors[0].dim().0 != 1 || tensors[tensors.len() - 1].dim().2 != 1 {
            return Err(Error::DimensionMismatch("MPS boundary bonds must be 1".into()));
        }
        for (k, w) in tensors.windows(2).enumerate() {
            if w[0].dim().2 != w[1].dim().0 {
                return Err(Error::DimensionMismatch(format!("bond {k} mismatch")));
            }
        }
        if tensors.iter().any(|a| a.dim().1 != PHYS_DIM) {
            return Err(Error::DimensionMismatch("physical dimension must be 2".into()));
        }
        let chi = tensors.iter().map(|a| a.dim().2).max().unwrap_or(1);
        Ok(Self { tensors, center: None, truncation_error: 0.0, chi_max: chi })
    }

    /// Product state from per-site amplitudes `(⟨↑|φ⟩, ⟨↓|φ⟩)`, normalized.
    pub fn product(local: &[[T; 2]]) -> Result<Self> {
        let tensors = local
            .iter()
            .map(|amp| Array3::from_shape_vec((1, PHYS_DIM, 1), amp.to_vec()).unwrap())
            .collect();
        let mut mps = Self::from_tensors(tensors)?;
        mps.canonicalize(0)?;
        mps.normalize()?;
        Ok(mps)
    }

    /// Computational basis state; `bits[k] = 1` means spin down at site `k`.
    pub fn basis_state(bits: &[u8]) -> Result<Self> {
        let local: Vec<[T; 2]> = bits
            .iter()
            .map(|&b| if b == 0 { [T::one(), T::zero()] } else { [T::zero(), T::one()] })
            .collect();
        Self::product(&local)
    }

    pub fn all_up(n: usize) -> Result<Self> {
        Self::basis_state(&vec![0; n])
    }

    /// Random normalized state with bond dimensions `min(chi, 2^k, 2^(n-k))`.
    pub fn random(n: usize, chi: usize, seed: u64) -> Result<Self> {
        if n == 0 || chi == 0 {
            return Err(Error::InvalidInput("random MPS needs n >= 1 and chi >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = full_bond_dims(n, chi);
        let tensors = (0..n)
            .map(|k| {
                let (dl, dr) = (dims[k], dims[k + 1]);
                Array3::from_shape_fn((dl, PHYS_DIM, dr), |_| T::random_unit(&mut rng))
            })
            .collect();
        let mut mps = Self::from_tensors(tensors)?;
        mps.chi_max = chi;
        mps.canonicalize(0)?;
        mps.normalize()?;
        Ok(mps)
    }

    /// Exact (or truncated) MPS of a dense vector, site 0 most significant.
    pub fn from_dense(psi: &Array1<T>, chi_max: usize, cutoff: f64) -> Result<Self> {
        let len = psi.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!("dense length {len} is not 2^N")));
        }
        let n = len.trailing_zeros() as usize;
        let mut tensors = Vec::with_capacity(n);
        let mut rest = Array2::from_shape_vec((1, len), psi.to_vec()).unwrap();
        let mut discarded = 0.0;
        for _ in 0..n - 1 {
            let (dl, cols) = rest.dim();
            let m = to_matrix(rest.view(), dl * PHYS_DIM, cols / PHYS_DIM);
            let svd = truncated_svd(&m.view(), chi_max, cutoff)?;
            discarded += svd.discarded_weight;
            let chi = svd.s.len();
            tensors.push(reshape(svd.u, (dl, PHYS_DIM, chi)));
            rest = scale_rows(&svd.vt, &svd.s);
        }
        let (dl, _) = rest.dim();
        tensors.push(reshape(rest, (dl, PHYS_DIM, 1)));
        let mut mps = Self::from_tensors(tensors)?;
        mps.center = Some(n - 1);
        mps.truncation_error = discarded;
        mps.chi_max = chi_max;
        Ok(mps)
    }

    /// Dense `2^N` amplitude vector.
    pub fn to_dense(&self) -> Result<Array1<T>> {
        if self.len() > 24 {
            return Err(Error::TooLarge { n: self.len(), cap: 24 });
        }
        let mut acc = Array2::from_elem((1, 1), T::one());
        for a in &self.tensors {
            let (dl, d, dr) = a.dim();
            let prefix = acc.dim().0;
            let next = acc.dot(&to_matrix(a.view(), dl, d * dr));
            acc = reshape(next, (prefix * d, dr));
        }
        let rows = acc.dim().0;
        Ok(reshape(acc, rows))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensor(&self, k: usize) -> &Array3<T> {
        &self.tensors[k]
    }

    pub fn tensors(&self) -> &[Array3<T>] {
        &self.tensors
    }

    /// Replace a site tensor. Invalidates the canonical center unless it is `k`.
    pub fn set_tensor(&mut self, k: usize, a: Array3<T>) -> Result<()> {
        let old = self.tensors[k].dim();
        let new = a.dim();
        if old.0 != new.0 || old.2 != new.2 || new.1 != PHYS_DIM {
            return Err(Error::DimensionMismatch(format!("tensor {k}: {old:?} -> {new:?}")));
        }
        self.tensors[k] = a;
        if self.center != Some(k) {
            self.center = None;
        }
        Ok(())
    }

    /// Orthogonality center, `None` if the state is not in mixed canonical form.
    pub fn center(&self) -> Option<usize> {
        self.center
    }

    /// Declare the center without checking; the caller guarantees isometries.
    pub(crate) fn assume_center(&mut self, k: usize) {
        self.center = Some(k);
    }

    pub(crate) fn tensors_mut(&mut self) -> &mut Vec<Array3<T>> {
        &mut self.tensors
    }

    /// Accumulated discarded weight of all truncations applied so far.
    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    pub fn add_truncation_error(&mut self, w: f64) {
        self.truncation_error += w;
    }

    pub fn chi_max(&self) -> usize {
        self.chi_max
    }

    pub fn set_chi_max(&mut self, chi: usize) {
        self.chi_max = chi;
    }

    /// Internal bond dimensions (length `N - 1`).
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors.iter().take(self.len() - 1).map(|a| a.dim().2).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    fn left_orthonormalize(&mut self, k: usize) -> Result<()> {
        let (dl, d, dr) = self.tensors[k].dim();
        let (q, r) = qr_thin(&to_matrix(self.tensors[k].view(), dl * d, dr).view())?;
        let chi = q.dim().1;
        self.tensors[k] = reshape(q, (dl, d, chi));
        let next = &self.tensors[k + 1];
        let (_, d2, dr2) = next.dim();
        let merged = r.dot(&to_matrix(next.view(), dr, d2 * dr2));
        self.tensors[k + 1] = reshape(merged, (chi, d2, dr2));
        Ok(())
    }

    fn right_orthonormalize(&mut self, k: usize) -> Result<()> {
        let (dl, d, dr) = self.tensors[k].dim();
        let (l, q) = lq_thin(&to_matrix(self.tensors[k].view(), dl, d * dr).view())?;
        let chi = q.dim().0;
        self.tensors[k] = reshape(q, (chi, d, dr));
        let prev = &self.tensors[k - 1];
        let (dl0, d0, _) = prev.dim();
        let merged = to_matrix(prev.view(), dl0 * d0, dl).dot(&l);
        self.tensors[k - 1] = reshape(merged, (dl0, d0, chi));
        Ok(())
    }

    /// Bring the state into mixed canonical form with center `c`.
    pub fn canonicalize(&mut self, c: usize) -> Result<()> {
        if c >= self.len() {
            return Err(Error::InvalidInput(format!("center {c} out of range")));
        }
        for k in 0..c {
            self.left_orthonormalize(k)?;
        }
        for k in (c + 1..self.len()).rev() {
            self.right_orthonormalize(k)?;
        }
        self.center = Some(c);
        Ok(())
    }

    /// Shift the orthogonality center to `to` (canonicalizing first if needed).
    pub fn move_center(&mut self, to: usize) -> Result<()> {
        let Some(mut c) = self.center else {
            return self.canonicalize(to);
        };
        if to >= self.len() {
            return Err(Error::InvalidInput(format!("center {to} out of range")));
        }
        while c < to {
            self.left_orthonormalize(c)?;
            c += 1;
        }
        while c > to {
            self.right_orthonormalize(c)?;
            c -= 1;
        }
        self.center = Some(to);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Mps<T>) -> Result<T> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch("overlap of MPS with different lengths".into()));
        }
        let mut o = Array2::from_elem((1, 1), T::one());
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            o = left_overlap_update(&o, a, b);
        }
        Ok(o[[0, 0]])
    }

    pub fn norm(&self) -> f64 {
        match self.center {
            Some(c) => self.tensors[c].iter().map(|x| x.square()).sum::<f64>().sqrt(),
            None => self.overlap(self).map(|x| x.re().max(0.0).sqrt()).unwrap_or(f64::NAN),
        }
    }

    /// Rescale to unit norm; fails on a zero state.
    pub fn normalize(&mut self) -> Result<f64> {
        let nrm = self.norm();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::InvalidInput(format!("cannot normalize a state of norm {nrm}")));
        }
        let k = self.center.unwrap_or(0);
        let inv = T::from_real(1.0 / nrm);
        self.tensors[k].mapv_inplace(|x| x * inv);
        Ok(nrm)
    }

    /// Apply a single-site operator and renormalize.
    pub fn apply_local(&mut self, op: &Array2<T>, site: usize) -> Result<()> {
        if site >= self.len() {
            return Err(Error::InvalidInput(format!("site {site} out of range")));
        }
        if op.dim() != (PHYS_DIM, PHYS_DIM) {
            return Err(Error::DimensionMismatch("local operator must be 2x2".into()));
        }
        self.move_center(site)?;
        let out = apply_site_op(&self.tensors[site], op);
        self.tensors[site] = out;
        self.normalize().map_err(|_| Error::InvalidInput("local operator annihilated the state".into()))?;
        Ok(())
    }

    /// Grow every bond to `min(chi, 2^k, 2^(N-k))` by adding orthonormal
    /// directions with zero weight. The state is unchanged; afterwards the
    /// one- and two-site tangent spaces span the whole Hilbert space when
    /// `chi` is large enough.
    pub fn pad_bond_dims(&mut self, chi: usize, seed: u64) -> Result<()> {
        let n = self.len();
        let target = full_bond_dims(n, chi);
        self.canonicalize(0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in (1..n).rev() {
            let (dl, d, dr) = self.tensors[k].dim();
            let want = target[k];
            if want <= dl {
                continue;
            }
            let rows = to_matrix(self.tensors[k].view(), dl, d * dr);
            let extra = orthonormal_completion(&rows, want - dl, &mut rng)?;
            let mut grown = Array2::<T>::zeros((want, d * dr));
            grown.slice_mut(s![..dl, ..]).assign(&rows);
            grown.slice_mut(s![dl.., ..]).assign(&extra);
            self.tensors[k] = reshape(grown, (want, d, dr));
            let prev = &self.tensors[k - 1];
            let (pl, pd, _) = prev.dim();
            let mut p = Array3::<T>::zeros((pl, pd, want));
            p.slice_mut(s![.., .., ..dl]).assign(prev);
            self.tensors[k - 1] = p;
        }
        self.chi_max = self.chi_max.max(chi);
        self.center = Some(0);
        Ok(())
    }

    /// Split a two-site tensor `θ[a, s, t, b]` into sites `k`, `k+1`.
    /// The center ends on `k+1` when `move_right`, else on `k`.
    pub fn set_two_site(
        &mut self,
        k: usize,
        theta: &Array4<T>,
        chi_max: usize,
        cutoff: f64,
        move_right: bool,
    ) -> Result<SplitInfo> {
        let (dl, d1, d2, dr) = theta.dim();
        let m = to_matrix(theta.view(), dl * d1, d2 * dr);
        let svd = truncated_svd(&m.view(), chi_max, cutoff)?;
        let chi = svd.s.len();
        let (left, right) = if move_right {
            (svd.u.clone(), scale_rows(&svd.vt, &svd.s))
        } else {
            (scale_cols(&svd.u, &svd.s), svd.vt.clone())
        };
        self.tensors[k] = reshape(left, (dl, d1, chi));
        self.tensors[k + 1] = reshape(right, (chi, d2, dr));
        self.center = Some(if move_right { k + 1 } else { k });
        self.truncation_error += svd.discarded_weight;
        let total: f64 = svd.s.iter().map(|x| x * x).sum();
        let s = if total > 0.0 { svd.s.mapv(|x| x / total.sqrt()) } else { svd.s };
        Ok(SplitInfo { singular_values: s, discarded_weight: svd.discarded_weight })
    }

    /// Two-site tensor `θ[a, s, t, b]` of sites `k`, `k+1`.
    pub fn two_site(&self, k: usize) -> Array4<T> {
        let (a, b) = (&self.tensors[k], &self.tensors[k + 1]);
        let (dl, d1, chi) = a.dim();
        let (_, d2, dr) = b.dim();
        let m = to_matrix(a.view(), dl * d1, chi).dot(&to_matrix(b.view(), chi, d2 * dr));
        reshape(m, (dl, d1, d2, dr))
    }

    /// Normalized Schmidt coefficients across the bond between `b` and `b+1`.
    pub fn schmidt_values(&mut self, b: usize) -> Result<Array1<f64>> {
        if b + 1 >= self.len() {
            return Err(Error::InvalidInput(format!("bond {b} out of range")));
        }
        self.move_center(b)?;
        let (dl, d, dr) = self.tensors[b].dim();
        let m = to_matrix(self.tensors[b].view(), dl * d, dr);
        let svd = truncated_svd(&m.view(), dr.min(dl * d), 0.0)?;
        let total: f64 = svd.s.iter().map(|x| x * x).sum();
        Ok(svd.s.mapv(|x| x / total.max(f64::MIN_POSITIVE).sqrt()))
    }
}

impl Mps<f64> {
    pub fn to_complex(&self) -> Mps<Complex64> {
        Mps {
            tensors: self.tensors.iter().map(|a| a.mapv(Complex64::from)).collect(),
            center: self.center,
            truncation_error: self.truncation_error,
            chi_max: self.chi_max,
        }
    }
}

/// `Σ_s' op[s, s'] A[:, s', :]`.
pub(crate) fn apply_site_op<T: Scalar>(a: &Array3<T>, op: &Array2<T>) -> Array3<T> {
    let (dl, d, dr) = a.dim();
    let mut out = Array3::<T>::zeros((dl, d, dr));
    for s in 0..d {
        for sp in 0..d {
            let c = op[[s, sp]];
            if c != T::zero() {
                let src = a.slice(s![.., sp, ..]);
                let mut dst = out.slice_mut(s![.., s, ..]);
                dst.zip_mut_with(&src, |x, &y| *x += c * y);
            }
        }
    }
    out
}

/// `min(chi, 2^k, 2^(n-k))` for `k = 0..=n`.
pub(crate) fn full_bond_dims(n: usize, chi: usize) -> Vec<usize> {
    (0..=n)
        .map(|k| {
            let e = k.min(n - k);
            if e >= usize::BITS as usize - 1 {
                chi
            } else {
                chi.min(1usize << e)
            }
        })
        .collect()
}

fn scale_rows<T: Scalar>(m: &Array2<T>, s: &Array1<f64>) -> Array2<T> {
    let mut out = m.clone();
    for (mut row, &x) in out.rows_mut().into_iter().zip(s.iter()) {
        row.mapv_inplace(|v| v * T::from_real(x));
    }
    out
}

fn scale_cols<T: Scalar>(m: &Array2<T>, s: &Array1<f64>) -> Array2<T> {
    let mut out = m.clone();
    for (mut col, &x) in out.columns_mut().into_iter().zip(s.iter()) {
        col.mapv_inplace(|v| v * T::from_real(x));
    }
    out
}

/// `extra` rows orthonormal to each other and to the orthonormal rows of `a`.
fn orthonormal_completion<T: Scalar, R: Rng>(a: &Array2<T>, extra: usize, rng: &mut R) -> Result<Array2<T>> {
    let cols = a.dim().1;
    if a.dim().0 + extra > cols {
        return Err(Error::InvalidInput("cannot complete beyond full rank".into()));
    }
    let ah = conj_transpose(&a.view());
    let mut g = Array2::from_shape_fn((extra, cols), |_| T::random_unit(rng));
    // two projection passes for numerical orthogonality
    for _ in 0..2 {
        let proj = g.dot(&ah).dot(a);
        g = g - proj;
    }
    let (q, _) = qr_thin(&conj_transpose(&g.view()).view())?;
    let mut rows = conj_transpose(&q.view());
    let proj = rows.dot(&ah).dot(a);
    rows = rows - proj;
    let (q, _) = qr_thin(&conj_transpose(&rows.view()).view())?;
    Ok(conj_transpose(&q.view()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_norm<T: Scalar>(v: &Array1<T>) -> f64 {
        v.iter().map(|x| x.square()).sum::<f64>().sqrt()
    }

    #[test]
    fn dense_round_trip() {
        let mps = Mps::<f64>::random(6, 8, 3).unwrap();
        let v = mps.to_dense().unwrap();
        assert!((dense_norm(&v) - 1.0).abs() < 1e-12);
        let back = Mps::from_dense(&v, 64, 0.0).unwrap();
        let w = back.to_dense().unwrap();
        assert!((v - w).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn canonical_moves_keep_state() {
        let mut mps = Mps::<Complex64>::random(7, 6, 11).unwrap();
        let v0 = mps.to_dense().unwrap();
        for c in [3, 6, 0, 4] {
            mps.move_center(c).unwrap();
            assert!((mps.norm() - 1.0).abs() < 1e-12);
            let v = mps.to_dense().unwrap();
            assert!((&v - &v0).iter().all(|x| x.norm() < 1e-12));
        }
    }

    #[test]
    fn isometries_around_center() {
        let mut mps = Mps::<f64>::random(6, 4, 5).unwrap();
        mps.move_center(3).unwrap();
        for k in 0..3 {
            let (dl, d, dr) = mps.tensor(k).dim();
            let m = to_matrix(mps.tensor(k).view(), dl * d, dr);
            assert!((m.t().dot(&m) - Array2::<f64>::eye(dr)).iter().all(|x| x.abs() < 1e-12));
        }
        for k in 4..6 {
            let (dl, d, dr) = mps.tensor(k).dim();
            let m = to_matrix(mps.tensor(k).view(), dl, d * dr);
            assert!((m.dot(&m.t()) - Array2::<f64>::eye(dl)).iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn padding_preserves_state_and_reaches_full_rank() {
        let mut mps = Mps::<Complex64>::all_up(6).unwrap();
        let v0 = mps.to_dense().unwrap();
        mps.pad_bond_dims(64, 1).unwrap();
        assert_eq!(mps.bond_dims(), vec![2, 4, 8, 4, 2]);
        let v = mps.to_dense().unwrap();
        assert!((&v - &v0).iter().all(|x| x.norm() < 1e-12));
        for k in 1..6 {
            let (dl, d, dr) = mps.tensor(k).dim();
            let m = to_matrix(mps.tensor(k).view(), dl, d * dr);
            let mh = conj_transpose(&m.view());
            let id = m.dot(&mh);
            assert!((id - Array2::<Complex64>::eye(dl)).iter().all(|x| x.norm() < 1e-12));
        }
    }

    #[test]
    fn sigma_x_flips_one_spin() {
        let mut mps = Mps::<f64>::all_up(3).unwrap();
        mps.apply_local(&crate::ops::Pauli::X.matrix(), 1).unwrap();
        let v = mps.to_dense().unwrap();
        assert!((v[0b010] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bell_pair_schmidt_values() {
        let mut psi = Array1::<f64>::zeros(4);
        psi[0] = 1.0 / 2f64.sqrt();
        psi[3] = 1.0 / 2f64.sqrt();
        let mut mps = Mps::from_dense(&psi, 4, 0.0).unwrap();
        let s = mps.schmidt_values(0).unwrap();
        assert!((s[0] - s[1]).abs() < 1e-14);
    }
}
