use ndarray::Array2;

use super::env::{left_overlap_update, right_overlap_update};
use super::state::apply_site_op;
use super::{Mps, Scalar};
use crate::ops::{PauliString, PauliSum};
use crate::{Error, Result};

/// `-Σ p ln p` with `p = s² / Σ s²`.
pub fn entropy_from_singular_values(s: &[f64]) -> f64 {
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total <= 0.0 {
        return 0.0;
    }
    s.iter()
        .map(|x| x * x / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Norm environments of a fixed state, for cheap repeated expectation values
/// of products of single-site operators.
///
/// `left[k]` contracts `⟨ψ|ψ⟩` over sites `< k`, `right[k]` over sites `> k`.
/// Results are divided by `⟨ψ|ψ⟩`, so the state need not be normalized.
pub struct MeasureCache<'a, T> {
    mps: &'a Mps<T>,
    left: Vec<Array2<T>>,
    right: Vec<Array2<T>>,
    norm2: f64,
}

impl<'a, T: Scalar> MeasureCache<'a, T> {
    pub fn new(mps: &'a Mps<T>) -> Result<Self> {
        let n = mps.len();
        let mut left = Vec::with_capacity(n + 1);
        left.push(Array2::from_elem((1, 1), T::one()));
        for k in 0..n {
            let a = mps.tensor(k);
            left.push(left_overlap_update(&left[k], a, a));
        }
        let mut right = vec![Array2::from_elem((1, 1), T::one()); n];
        for k in (0..n - 1).rev() {
            let a = mps.tensor(k + 1);
            right[k] = right_overlap_update(&right[k + 1], a, a);
        }
        let norm2 = left[n][[0, 0]].re();
        if !(norm2 > 0.0) {
            return Err(Error::InvalidInput("state has zero norm".into()));
        }
        Ok(Self { mps, left, right, norm2 })
    }

    pub fn norm_squared(&self) -> f64 {
        self.norm2
    }

    fn close(l: &Array2<T>, r: &Array2<T>) -> T {
        l.iter().zip(r.iter()).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// `⟨Π_k op_k⟩` for operators on distinct sites (any order).
    pub fn product_expectation(&self, ops: &[(usize, Array2<T>)]) -> Result<T> {
        if ops.is_empty() {
            return Ok(T::one());
        }
        let mut sorted: Vec<&(usize, Array2<T>)> = ops.iter().collect();
        sorted.sort_by_key(|(s, _)| *s);
        if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInput("operators must act on distinct sites".into()));
        }
        let (first, last) = (sorted[0].0, sorted[sorted.len() - 1].0);
        if last >= self.mps.len() {
            return Err(Error::InvalidInput(format!("site {last} out of range")));
        }
        let mut env = self.left[first].clone();
        let mut next = sorted.iter().peekable();
        for k in first..=last {
            let a = self.mps.tensor(k);
            env = match next.peek() {
                Some((s, op)) if *s == k => {
                    next.next();
                    left_overlap_update(&env, a, &apply_site_op(a, op))
                }
                _ => left_overlap_update(&env, a, a),
            };
        }
        Ok(Self::close(&env, &self.right[last]) * T::from_real(1.0 / self.norm2))
    }

    pub fn expect_string(&self, term: &PauliString) -> Result<f64> {
        let ops: Vec<(usize, Array2<T>)> =
            term.ops.iter().map(|&(s, p)| (s, p.matrix().mapv(T::from_real))).collect();
        Ok(term.coef * self.product_expectation(&ops)?.re())
    }

    pub fn expect_sum(&self, op: &PauliSum) -> Result<f64> {
        if op.n_sites != self.mps.len() {
            return Err(Error::DimensionMismatch("operator and state sizes differ".into()));
        }
        op.terms.iter().map(|t| self.expect_string(t)).sum()
    }

    /// `⟨A_i B_j⟩` for every `j` in `targets` (`j ≠ i`).
    pub fn correlation_row(&self, op_a: &Array2<T>, i: usize, op_b: &Array2<T>, targets: &[usize]) -> Result<Vec<T>> {
        let n = self.mps.len();
        if i >= n || targets.iter().any(|&j| j >= n || j == i) {
            return Err(Error::InvalidInput("correlation sites out of range or coincident".into()));
        }
        let scale = T::from_real(1.0 / self.norm2);
        let a_i = apply_site_op(self.mps.tensor(i), op_a);
        let mut out = vec![T::zero(); targets.len()];

        let right_max = targets.iter().copied().filter(|&j| j > i).max();
        if let Some(jmax) = right_max {
            let mut env = left_overlap_update(&self.left[i], self.mps.tensor(i), &a_i);
            for k in i + 1..=jmax {
                let a = self.mps.tensor(k);
                if targets.contains(&k) {
                    let closed = left_overlap_update(&env, a, &apply_site_op(a, op_b));
                    let value = Self::close(&closed, &self.right[k]) * scale;
                    for (slot, _) in out.iter_mut().zip(targets).filter(|(_, &j)| j == k) {
                        *slot = value;
                    }
                }
                env = left_overlap_update(&env, a, a);
            }
        }
        let left_min = targets.iter().copied().filter(|&j| j < i).min();
        if let Some(jmin) = left_min {
            let mut env = right_overlap_update(&self.right[i], self.mps.tensor(i), &a_i);
            for k in (jmin..i).rev() {
                let a = self.mps.tensor(k);
                if targets.contains(&k) {
                    let closed = right_overlap_update(&env, a, &apply_site_op(a, op_b));
                    let value = Self::close(&self.left[k], &closed) * scale;
                    for (slot, _) in out.iter_mut().zip(targets).filter(|(_, &j)| j == k) {
                        *slot = value;
                    }
                }
                env = right_overlap_update(&env, a, a);
            }
        }
        Ok(out)
    }
}

/// `⟨A_a B_b⟩` on a single pair of sites.
pub fn two_point_correlation<T: Scalar>(
    mps: &Mps<T>,
    op_a: &Array2<T>,
    site_a: usize,
    op_b: &Array2<T>,
    site_b: usize,
) -> Result<T> {
    let cache = MeasureCache::new(mps)?;
    Ok(cache.correlation_row(op_a, site_a, op_b, &[site_b])?[0])
}

/// Von Neumann entropy at every bond, sweeping the center left to right.
pub fn bond_entropies<T: Scalar>(mps: &Mps<T>) -> Result<Vec<f64>> {
    let mut work = mps.clone();
    let mut out = Vec::with_capacity(mps.len().saturating_sub(1));
    for b in 0..mps.len().saturating_sub(1) {
        let s = work.schmidt_values(b)?;
        out.push(entropy_from_singular_values(s.as_slice().unwrap()));
    }
    Ok(out)
}

/// Von Neumann entropy at every bond, sweeping right to left and reading
/// the Schmidt values off the right site of each bond.
pub fn bond_entropies_from_right<T: Scalar>(mps: &Mps<T>) -> Result<Vec<f64>> {
    use super::linalg::{to_matrix, truncated_svd};
    let n = mps.len();
    let mut work = mps.clone();
    let mut out = vec![0.0; n.saturating_sub(1)];
    for b in (0..n.saturating_sub(1)).rev() {
        work.move_center(b + 1)?;
        let a = work.tensor(b + 1);
        let (dl, d, dr) = a.dim();
        let m = to_matrix(a.view(), dl, d * dr);
        let svd = truncated_svd(&m.view(), dl.min(d * dr), 0.0)?;
        out[b] = entropy_from_singular_values(svd.s.as_slice().unwrap());
    }
    Ok(out)
}
