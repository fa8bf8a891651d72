//! Second, independently written Hamiltonian builder.
//!
//! It shares no code with `lattice`: neighbors are enumerated by walking the
//! `(column, row)` grid, and the matrix is filled entry by entry from spin
//! configurations rather than from Pauli masks.

use ndarray::Array2;

use super::check_size;
use crate::Result;

/// Dense `H = -J Σ_<ab> σˣ_a σˣ_b - Σ_a g_a σᶻ_a` on an `lx × ly` grid.
///
/// Site `(c, r)` is stored at bit `n - 1 - (c·ly + r)` of the basis index.
/// Vertical neighbors wrap only for `periodic && ly ≥ 3`.
pub fn cylinder_hamiltonian(lx: usize, ly: usize, periodic: bool, fields: &[f64], j: f64) -> Result<Array2<f64>> {
    let n = lx * ly;
    check_size(n)?;
    assert_eq!(fields.len(), n, "one field per site");
    let mut pairs = Vec::new();
    for c in 0..lx {
        for r in 0..ly {
            let here = c * ly + r;
            if c + 1 < lx {
                pairs.push((here, (c + 1) * ly + r));
            }
            if r + 1 < ly {
                pairs.push((here, c * ly + r + 1));
            } else if periodic && ly >= 3 {
                pairs.push((here, c * ly));
            }
        }
    }
    let dim = 1usize << n;
    let spin_down = |state: usize, site: usize| (state >> (n - 1 - site)) & 1 == 1;
    let mut h = Array2::<f64>::zeros((dim, dim));
    for state in 0..dim {
        let mut diag = 0.0;
        for (site, &g) in fields.iter().enumerate() {
            diag -= if spin_down(state, site) { -g } else { g };
        }
        h[[state, state]] += diag;
        for &(a, b) in &pairs {
            let flipped = state ^ (1 << (n - 1 - a)) ^ (1 << (n - 1 - b));
            h[[flipped, state]] -= j;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::DenseOperator;
    use crate::lattice::{tfi_hamiltonian, LatticeGeometry};

    #[test]
    fn agrees_with_pauli_builder() {
        for &(lx, ly) in &[(2, 2), (3, 3), (2, 5), (4, 1)] {
            let geom = LatticeGeometry::new(lx, ly, ly > 1).unwrap();
            let fields: Vec<f64> = (0..lx * ly).map(|i| 0.3 + 0.17 * i as f64).collect();
            let a = DenseOperator::new(&tfi_hamiltonian(&geom, &fields, 1.1).unwrap()).unwrap().to_dense();
            let b = cylinder_hamiltonian(lx, ly, ly > 1, &fields, 1.1).unwrap();
            assert!((a - b).iter().all(|x| x.abs() < 1e-13), "{lx}x{ly}");
        }
    }
}
