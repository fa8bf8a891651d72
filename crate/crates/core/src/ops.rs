//! Real Pauli-string operators.
//!
//! Everything the transverse-field Ising model needs (the Hamiltonian, the
//! local energy densities, observables) is a real linear combination of
//! products of `σˣ` and `σᶻ` on distinct sites. Both the MPO builder and the
//! exact-diagonalization oracle consume this one representation.

use ndarray::{array, Array2};

use crate::{Error, Result};

/// Single-site operator of a real Pauli string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Z,
}

impl Pauli {
    /// Matrix in the `σᶻ` eigenbasis, `|0⟩ = |↑⟩`, `|1⟩ = |↓⟩`.
    pub fn matrix(self) -> Array2<f64> {
        match self {
            Pauli::X => array![[0.0, 1.0], [1.0, 0.0]],
            Pauli::Z => array![[1.0, 0.0], [0.0, -1.0]],
        }
    }
}

pub fn identity2() -> Array2<f64> {
    array![[1.0, 0.0], [0.0, 1.0]]
}

/// `coef · Π_k op_k(site_k)` with strictly increasing sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coef: f64,
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn new(coef: f64, mut ops: Vec<(usize, Pauli)>) -> Result<Self> {
        ops.sort_by_key(|&(s, _)| s);
        if ops.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInput(
                "Pauli string acts twice on the same site".into(),
            ));
        }
        Ok(Self { coef, ops })
    }

    pub fn one(coef: f64, site: usize, op: Pauli) -> Self {
        Self { coef, ops: vec![(site, op)] }
    }

    pub fn two(coef: f64, a: usize, op_a: Pauli, b: usize, op_b: Pauli) -> Result<Self> {
        Self::new(coef, vec![(a, op_a), (b, op_b)])
    }

    pub fn max_site(&self) -> Option<usize> {
        self.ops.last().map(|&(s, _)| s)
    }

    /// Bit masks `(flip, phase)` for a computational basis where site `k`
    /// is bit `n - 1 - k` (site 0 most significant).
    pub fn masks(&self, n: usize) -> (usize, usize) {
        let mut flip = 0usize;
        let mut phase = 0usize;
        for &(s, op) in &self.ops {
            let bit = 1usize << (n - 1 - s);
            match op {
                Pauli::X => flip |= bit,
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase)
    }
}

/// A sum of Pauli strings on `n_sites` qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliSum {
    pub n_sites: usize,
    pub terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_sites: usize) -> Self {
        Self { n_sites, terms: Vec::new() }
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        match term.max_site() {
            Some(s) if s >= self.n_sites => Err(Error::InvalidInput(format!(
                "term acts on site {s} but operator has {} sites",
                self.n_sites
            ))),
            _ => {
                self.terms.push(term);
                Ok(())
            }
        }
    }

    pub fn extend(&mut self, other: &PauliSum) -> Result<()> {
        for t in &other.terms {
            self.push(t.clone())?;
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        PauliSum {
            n_sites: self.n_sites,
            terms: self
                .terms
                .iter()
                .map(|t| PauliString { coef: t.coef * factor, ops: t.ops.clone() })
                .collect(),
        }
    }

    /// Merge equal strings and drop zero coefficients.
    pub fn simplified(&self) -> PauliSum {
        let mut merged: Vec<PauliString> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for t in &self.terms {
            match index.get(&t.ops) {
                Some(&i) => {
                    let m: &mut PauliString = &mut merged[i];
                    m.coef += t.coef;
                }
                None => {
                    index.insert(t.ops.clone(), merged.len());
                    merged.push(t.clone());
                }
            }
        }
        merged.retain(|t| t.coef != 0.0);
        PauliSum { n_sites: self.n_sites, terms: merged }
    }

    /// Sum of |coef|, an upper bound on the operator norm.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.abs()).sum()
    }

    /// Largest distance between the first and last site of any term.
    pub fn max_span(&self) -> usize {
        self.terms
            .iter()
            .map(|t| match (t.ops.first(), t.ops.last()) {
                (Some(a), Some(b)) => b.0 - a.0,
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }
}
