//! Open transverse-field Ising chain `H = -J (Σ σˣ_i σˣ_{i+1} + g Σ σᶻ_i)`
//! solved through Majorana fermions.
//!
//! With `a_{2i} = P_i σˣ_i`, `a_{2i+1} = P_i σʸ_i` (`P_i` the Jordan-Wigner
//! string) one has `σᶻ_i = -i a_{2i} a_{2i+1}` and
//! `σˣ_i σˣ_{i+1} = -i a_{2i+1} a_{2i+2}`, so `H = (i/4) aᵀ A a` with a real
//! antisymmetric `A`. Its singular values are the mode energies `ε_k`
//! (each twice) and the ground-state covariance `Γ_pq = i⟨a_p a_q⟩` is
//! `-U Vᵀ` for `A = U S Vᵀ`.

use ndarray::{s, Array2};
use ndarray_linalg::SVD;

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct FreeFermionChain {
    pub length: usize,
    pub g: f64,
    pub j: f64,
    /// Single-particle energies, ascending.
    pub mode_energies: Vec<f64>,
    covariance: Array2<f64>,
}

impl FreeFermionChain {
    pub fn new(length: usize, g: f64, j: f64) -> Result<Self> {
        if length < 2 {
            return Err(Error::InvalidInput("chain needs at least two sites".into()));
        }
        if !g.is_finite() || !j.is_finite() {
            return Err(Error::InvalidInput("non-finite couplings".into()));
        }
        let m = 2 * length;
        let mut a = Array2::<f64>::zeros((m, m));
        for i in 0..length {
            a[[2 * i, 2 * i + 1]] = 2.0 * j * g;
            a[[2 * i + 1, 2 * i]] = -2.0 * j * g;
            if i + 1 < length {
                a[[2 * i + 1, 2 * i + 2]] = 2.0 * j;
                a[[2 * i + 2, 2 * i + 1]] = -2.0 * j;
            }
        }
        let (u, sv, vt) = a.svd(true, true)?;
        let (u, vt) = (u.expect("u"), vt.expect("vt"));
        let covariance = -u.dot(&vt);
        // singular values come in equal pairs
        let mut energies: Vec<f64> = sv.iter().copied().collect();
        energies.sort_by(f64::total_cmp);
        let mode_energies = energies.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        Ok(Self { length, g, j, mode_energies, covariance })
    }

    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.mode_energies.iter().sum::<f64>()
    }

    /// Lowest excitation energy.
    pub fn gap(&self) -> f64 {
        self.mode_energies[0]
    }

    /// `E_max - E_min = Σ ε_k`.
    pub fn bandwidth(&self) -> f64 {
        self.mode_energies.iter().sum()
    }

    /// Ground-state `⟨σᶻ_i⟩`.
    pub fn sz(&self, i: usize) -> f64 {
        -self.covariance[[2 * i, 2 * i + 1]]
    }

    /// Ground-state `⟨σˣ_i σˣ_j⟩` as a Pfaffian of the covariance block
    /// on Majoranas `2i+1 ..= 2j`.
    pub fn sxsx(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.length || j >= self.length {
            return Err(Error::InvalidInput("site out of range".into()));
        }
        let (i, j) = (i.min(j), i.max(j));
        if i == j {
            return Ok(1.0);
        }
        let block = self.covariance.slice(s![2 * i + 1..2 * j + 1, 2 * i + 1..2 * j + 1]).to_owned();
        let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * pfaffian(&block)?)
    }
}

/// Pfaffian of a real antisymmetric matrix (skew Gaussian elimination with
/// partial pivoting).
pub fn pfaffian(m: &Array2<f64>) -> Result<f64> {
    let (n, c) = m.dim();
    if n != c {
        return Err(Error::DimensionMismatch("Pfaffian needs a square matrix".into()));
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let mut a = m.clone();
    let mut pf = 1.0;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let mut kp = k + 1;
        for col in k + 2..n {
            if a[[k, col]].abs() > a[[k, kp]].abs() {
                kp = col;
            }
        }
        if kp != k + 1 {
            for idx in 0..n {
                a.swap([k + 1, idx], [kp, idx]);
            }
            for idx in 0..n {
                a.swap([idx, k + 1], [idx, kp]);
            }
            pf = -pf;
        }
        let pivot = a[[k, k + 1]];
        if pivot == 0.0 {
            return Ok(0.0);
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|col| a[[k, col]] / pivot).collect();
            let col_k1: Vec<f64> = (k + 2..n).map(|row| a[[row, k + 1]]).collect();
            for (p, row) in (k + 2..n).enumerate() {
                for (q, col) in (k + 2..n).enumerate() {
                    a[[row, col]] += tau[p] * col_k1[q] - col_k1[p] * tau[q];
                }
            }
        }
    }
    Ok(pf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::{dense_spectrum, dense_string_expectation};
    use crate::lattice::{tfi_hamiltonian, uniform_fields, LatticeGeometry};
    use crate::ops::{Pauli, PauliString};

    #[test]
    fn pfaffian_small_cases() {
        let a = ndarray::array![[0.0, 2.5], [-2.5, 0.0]];
        assert!((pfaffian(&a).unwrap() - 2.5).abs() < 1e-15);
        let b = Array2::from_shape_fn((4, 4), |(i, j)| {
            let v = [[0.0, 1.0, 2.0, 3.0], [0.0, 0.0, 4.0, 5.0], [0.0, 0.0, 0.0, 6.0], [0.0; 4]];
            if i < j {
                v[i][j]
            } else {
                -v[j][i]
            }
        });
        // a01 a23 - a02 a13 + a03 a12 = 6 - 10 + 12
        assert!((pfaffian(&b).unwrap() - 8.0).abs() < 1e-13);
    }

    #[test]
    fn two_sites_closed_form() {
        let ff = FreeFermionChain::new(2, 1.0, 1.0).unwrap();
        assert!((ff.ground_energy() + 5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn matches_dense_chain() {
        for &(l, g) in &[(6, 0.5), (8, 1.0), (9, 1.5)] {
            let geom = LatticeGeometry::chain(l).unwrap();
            let h = tfi_hamiltonian(&geom, &uniform_fields(&geom, g), 1.0).unwrap();
            let spec = dense_spectrum(&h, 2).unwrap();
            let ff = FreeFermionChain::new(l, g, 1.0).unwrap();
            assert!((ff.ground_energy() - spec.values[0]).abs() < 1e-10);
            assert!((ff.gap() - (spec.values[1] - spec.values[0])).abs() < 1e-10);
            let psi = &spec.vectors[0];
            for r in 1..l {
                let term = PauliString::two(1.0, 0, Pauli::X, r, Pauli::X).unwrap();
                let exact = dense_string_expectation(psi, &term).unwrap();
                assert!((ff.sxsx(0, r).unwrap() - exact).abs() < 1e-9, "L={l} g={g} r={r}");
            }
            let z = dense_string_expectation(psi, &PauliString::one(1.0, 2, Pauli::Z)).unwrap();
            assert!((ff.sz(2) - z).abs() < 1e-9);
        }
    }

    #[test]
    fn critical_energy_density_converges() {
        // e0(L) = -4/π + O(1/L) at g = 1
        let e = |l: usize| FreeFermionChain::new(l, 1.0, 1.0).unwrap().ground_energy() / l as f64;
        let target = -4.0 / std::f64::consts::PI;
        let (d1, d2) = ((e(100) - target).abs(), (e(200) - target).abs());
        assert!(d1 < 0.02 && (d1 / d2 - 2.0).abs() < 0.1);
    }
}
