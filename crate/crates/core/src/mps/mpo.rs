use std::collections::BTreeMap;

use ndarray::{Array2, Array3, Array4};

use super::{Scalar, PHYS_DIM};
use crate::ops::{identity2, Pauli, PauliSum};
use crate::{Error, Result};

/// Matrix-product operator with tensors `W[k][w_left, w_right, out, in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpo<T> {
    tensors: Vec<Array4<T>>,
}

const READY: usize = 0;
const DONE: usize = 1;

type Closing = (usize, f64, Pauli);

impl<T: Scalar> Mpo<T> {
    pub fn from_tensors(tensors: Vec<Array4<T>>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::InvalidInput("empty MPO".into()));
        }
        if tensors[0].dim().0 != 1 || tensors[tensors.len() - 1].dim().1 != 1 {
            return Err(Error::DimensionMismatch("MPO boundary bonds must be 1".into()));
        }
        for w in tensors.windows(2) {
            if w[0].dim().1 != w[1].dim().0 {
                return Err(Error::DimensionMismatch("MPO bond mismatch".into()));
            }
        }
        Ok(Self { tensors })
    }

    /// Exact MPO of a sum of one- and two-site Pauli strings.
    ///
    /// Finite-state construction: besides the "nothing placed yet" and
    /// "term completed" channels, every cut carries one channel per
    /// `(origin site, operator)` of the two-site terms crossing it. The
    /// bond dimension is therefore `2 + (number of distinct open origins)`,
    /// which is `Ly + 2` for the cylinder Hamiltonian.
    pub fn from_pauli_sum(op: &PauliSum) -> Result<Self> {
        let n = op.n_sites;
        if n == 0 {
            return Err(Error::InvalidInput("operator on zero sites".into()));
        }
        let mut onsite: Vec<Array2<f64>> = vec![Array2::zeros((PHYS_DIM, PHYS_DIM)); n];
        // (origin, op) -> list of (closing site, coef, op)
        let mut pairs: BTreeMap<(usize, Pauli), Vec<Closing>> = BTreeMap::new();
        for term in &op.terms {
            match term.ops.as_slice() {
                [] => {
                    onsite[0] = &onsite[0] + &(identity2() * term.coef);
                }
                [(s, p)] => {
                    onsite[*s] = &onsite[*s] + &(p.matrix() * term.coef);
                }
                [(a, pa), (b, pb)] => {
                    pairs.entry((*a, *pa)).or_default().push((*b, term.coef, *pb));
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "MPO builder supports one- and two-site strings only".into(),
                    ))
                }
            }
        }
        // channels open on cut k (between sites k and k+1)
        let mut cuts: Vec<Vec<(usize, Pauli)>> = vec![Vec::new(); n.saturating_sub(1)];
        for (&(origin, p), closes) in &pairs {
            let last = closes.iter().map(|c| c.0).max().unwrap_or(origin);
            for cut in cuts.iter_mut().take(last).skip(origin) {
                cut.push((origin, p));
            }
        }
        let channel_index = |cut: usize, key: (usize, Pauli)| -> Option<usize> {
            cuts[cut].iter().position(|&k| k == key).map(|i| i + 2)
        };
        let id = identity2();
        let mut tensors = Vec::with_capacity(n);
        for k in 0..n {
            let wl = if k == 0 { 1 } else { 2 + cuts[k - 1].len() };
            let wr = if k == n - 1 { 1 } else { 2 + cuts[k].len() };
            // full-size indices, remapped at the boundaries
            let l_of = |full: usize| -> Option<usize> {
                if k == 0 {
                    (full == READY).then_some(0)
                } else {
                    Some(full)
                }
            };
            let r_of = |full: usize| -> Option<usize> {
                if k == n - 1 {
                    (full == DONE).then_some(0)
                } else {
                    Some(full)
                }
            };
            let mut w = Array4::<f64>::zeros((wl, wr, PHYS_DIM, PHYS_DIM));
            let mut put = |lf: usize, rf: usize, m: &Array2<f64>| {
                if let (Some(l), Some(r)) = (l_of(lf), r_of(rf)) {
                    let mut slot = w.slice_mut(ndarray::s![l, r, .., ..]);
                    slot += m;
                }
            };
            put(READY, READY, &id);
            put(DONE, DONE, &id);
            put(READY, DONE, &onsite[k]);
            if k + 1 < n {
                for &(origin, p) in &cuts[k] {
                    let r = channel_index(k, (origin, p)).unwrap();
                    if origin == k {
                        put(READY, r, &p.matrix());
                    } else {
                        let l = channel_index(k - 1, (origin, p)).unwrap();
                        put(l, r, &id);
                    }
                }
            }
            if k > 0 {
                for (li, &(origin, p)) in cuts[k - 1].iter().enumerate() {
                    let mut closing = Array2::<f64>::zeros((PHYS_DIM, PHYS_DIM));
                    for &(b, coef, pb) in &pairs[&(origin, p)] {
                        if b == k {
                            closing = closing + pb.matrix() * coef;
                        }
                    }
                    put(li + 2, DONE, &closing);
                }
            }
            tensors.push(w.mapv(T::from_real));
        }
        Self::from_tensors(tensors)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut sum = PauliSum::new(n);
        sum.push(crate::ops::PauliString { coef: 1.0, ops: vec![] })?;
        Self::from_pauli_sum(&sum)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensor(&self, k: usize) -> &Array4<T> {
        &self.tensors[k]
    }

    pub fn tensors(&self) -> &[Array4<T>] {
        &self.tensors
    }

    /// Bond dimensions of the internal cuts.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors.iter().take(self.len() - 1).map(|w| w.dim().1).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.tensors[0].mapv_inplace(|x| x * factor);
        out
    }

    /// Dense `2^N × 2^N` matrix, site 0 being the most significant bit.
    pub fn to_dense(&self) -> Result<Array2<T>> {
        let n = self.len();
        if n > 14 {
            return Err(Error::TooLarge { n, cap: 14 });
        }
        // acc[w, row, col]
        let mut acc = Array3::<T>::from_elem((1, 1, 1), T::one());
        for w in &self.tensors {
            let (wl, wr, d, _) = w.dim();
            let (_, rows, cols) = acc.dim();
            let mut next = Array3::<T>::zeros((wr, rows * d, cols * d));
            for a in 0..wl {
                for b in 0..wr {
                    for s in 0..d {
                        for sp in 0..d {
                            let c = w[[a, b, s, sp]];
                            if c == T::zero() {
                                continue;
                            }
                            for r in 0..rows {
                                for q in 0..cols {
                                    let v = acc[[a, r, q]];
                                    if v != T::zero() {
                                        next[[b, r * d + s, q * d + sp]] += c * v;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            acc = next;
        }
        let (_, rows, cols) = acc.dim();
        Ok(acc.into_shape_with_order((rows, cols)).unwrap())
    }
}

impl Mpo<f64> {
    pub fn to_complex(&self) -> Mpo<num_complex::Complex64> {
        Mpo { tensors: self.tensors.iter().map(|w| w.mapv(num_complex::Complex64::from)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{tfi_hamiltonian, LatticeGeometry};
    use crate::ops::PauliString;

    #[test]
    fn two_site_chain_dense() {
        let g = LatticeGeometry::chain(2).unwrap();
        let h = tfi_hamiltonian(&g, &[1.0, 1.0], 1.0).unwrap();
        let mpo = Mpo::<f64>::from_pauli_sum(&h).unwrap();
        let dense = mpo.to_dense().unwrap();
        let x = Pauli::X.matrix();
        let z = Pauli::Z.matrix();
        let id = identity2();
        let kron = |a: &Array2<f64>, b: &Array2<f64>| {
            Array2::from_shape_fn((4, 4), |(i, j)| a[[i / 2, j / 2]] * b[[i % 2, j % 2]])
        };
        let expected = -kron(&x, &x) - kron(&z, &id) - kron(&id, &z);
        assert!((dense - expected).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn bond_dimension_is_ly_plus_two() {
        for ly in 3..=5 {
            let g = LatticeGeometry::cylinder(4, ly).unwrap();
            let h = tfi_hamiltonian(&g, &vec![1.0; g.n_sites()], 1.0).unwrap();
            let mpo = Mpo::<f64>::from_pauli_sum(&h).unwrap();
            assert_eq!(mpo.max_bond_dim(), ly + 2);
        }
    }

    #[test]
    fn identity_mpo_is_identity() {
        let mpo = Mpo::<f64>::identity(3).unwrap();
        assert_eq!(mpo.to_dense().unwrap(), Array2::<f64>::eye(8));
    }

    #[test]
    fn long_range_term() {
        let mut s = PauliSum::new(4);
        s.push(PauliString::two(0.7, 0, Pauli::Z, 3, Pauli::X).unwrap()).unwrap();
        let dense = Mpo::<f64>::from_pauli_sum(&s).unwrap().to_dense().unwrap();
        // ⟨0000| Z0 X3 |0001⟩ = 0.7
        assert!((dense[[0, 1]] - 0.7).abs() < 1e-15);
        assert!((dense[[8, 9]] + 0.7).abs() < 1e-15);
    }
}
