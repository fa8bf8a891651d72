//! Cylinder geometry, quench front and the transverse-field Ising Hamiltonian
//!
//! `H(t) = -J Σ_<ab> σˣ_a σˣ_b - Σ_a g_a(t) σᶻ_a` with `g_a(t) = J·g_c + h·f_a(t)`.
//!
//! Sites are laid out column by column: site `(col, row)` sits at chain
//! position `col·Ly + row`. Bonds along x therefore span exactly `Ly` chain
//! positions, bonds along y span 1, and the periodic wrap bond spans `Ly - 1`.

use serde::{Deserialize, Serialize};

use crate::error::ensure_finite;
use crate::mps::{Mpo, Scalar};
use crate::ops::{Pauli, PauliString, PauliSum};
use crate::{Error, Result};

/// Critical field of the infinite two-dimensional model.
pub const GC_2D: f64 = 3.04438;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    lx: usize,
    ly: usize,
    y_periodic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondKind {
    X,
    Y,
    /// The periodic bond closing a column, `(col, Ly-1) — (col, 0)`.
    Wrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    /// Chain index of the first site (always the smaller one).
    pub a: usize,
    pub b: usize,
    pub kind: BondKind,
}

impl LatticeGeometry {
    pub fn new(lx: usize, ly: usize, y_periodic: bool) -> Result<Self> {
        if lx < 1 || ly < 1 {
            return Err(Error::Geometry(format!("empty lattice {lx}x{ly}")));
        }
        if y_periodic && ly == 1 {
            return Err(Error::Geometry(
                "Ly = 1 with periodic y would couple a site to itself".into(),
            ));
        }
        Ok(Self { lx, ly, y_periodic })
    }

    /// Open chain of `l` sites (`Ly = 1`).
    pub fn chain(l: usize) -> Result<Self> {
        Self::new(l, 1, false)
    }

    /// Periodic-y cylinder.
    pub fn cylinder(lx: usize, ly: usize) -> Result<Self> {
        Self::new(lx, ly, true)
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn y_periodic(&self) -> bool {
        self.y_periodic
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn site_index(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.lx && row < self.ly);
        col * self.ly + row
    }

    pub fn site_coords(&self, index: usize) -> (usize, usize) {
        (index / self.ly, index % self.ly)
    }

    /// Centered x coordinate of a column: `col - (Lx - 1)/2`.
    pub fn x_coord(&self, col: usize) -> f64 {
        col as f64 - (self.lx as f64 - 1.0) / 2.0
    }

    /// Largest `|x|` over all columns.
    pub fn max_abs_x(&self) -> f64 {
        (self.lx as f64 - 1.0) / 2.0
    }

    /// Column that hosts `x = 0` (odd `Lx`) or the one just left of it (even `Lx`).
    pub fn center_col(&self) -> usize {
        (self.lx - 1) / 2
    }

    /// All nearest-neighbour bonds, each exactly once.
    pub fn bonds(&self) -> Vec<Bond> {
        let mut out = Vec::new();
        for col in 0..self.lx {
            for row in 0..self.ly {
                let a = self.site_index(col, row);
                if col + 1 < self.lx {
                    out.push(Bond { a, b: self.site_index(col + 1, row), kind: BondKind::X });
                }
                if row + 1 < self.ly {
                    out.push(Bond { a, b: self.site_index(col, row + 1), kind: BondKind::Y });
                } else if self.y_periodic && self.ly >= 3 {
                    out.push(Bond { a: self.site_index(col, 0), b: a, kind: BondKind::Wrap });
                }
            }
        }
        out
    }

    /// Vertical bonds of a column as row pairs `(r, r')`, `r' = r + 1 mod Ly`.
    fn column_y_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = (0..self.ly.saturating_sub(1)).map(|r| (r, r + 1)).collect();
        if self.y_periodic && self.ly >= 3 {
            pairs.push((self.ly - 1, 0));
        }
        pairs
    }

    /// MPS bond (between chain sites `k` and `k + 1`) that cuts the cylinder
    /// between columns `col` and `col + 1`.
    pub fn x_cut_bond(&self, col: usize) -> usize {
        (col + 1) * self.ly - 1
    }

    /// x coordinate of the cut between columns `col` and `col + 1`.
    pub fn x_cut_coord(&self, col: usize) -> f64 {
        0.5 * (self.x_coord(col) + self.x_coord(col + 1))
    }

    /// Number of x-bond columns, `Lx - 1`.
    pub fn n_x_cuts(&self) -> usize {
        self.lx.saturating_sub(1)
    }
}

/// Model and protocol parameters for one quench.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Ising coupling.
    pub j: f64,
    /// Critical transverse field (dimensionless, multiplies `J`).
    pub gc: f64,
    /// Amplitude of the gapping perturbation (energy units).
    pub h: f64,
    /// Front velocity; `f64::INFINITY` is a spatially uniform quench.
    pub v: f64,
    /// Front smoothing time.
    pub tau: f64,
}

impl ModelParams {
    /// `J = 1`, `h = 5 g_c`.
    pub fn standard(gc: f64, v: f64, tau: f64) -> Self {
        Self { j: 1.0, gc, h: 5.0 * gc, v, tau }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("J", self.j)?;
        ensure_finite("gc", self.gc)?;
        ensure_finite("h", self.h)?;
        ensure_finite("tau", self.tau)?;
        if self.j <= 0.0 {
            return Err(Error::InvalidInput(format!("J must be positive, got {}", self.j)));
        }
        if self.h < 0.0 {
            return Err(Error::InvalidInput(format!("h must be non-negative, got {}", self.h)));
        }
        if !(self.v > 0.0) {
            return Err(Error::InvalidInput(format!("v must be positive, got {}", self.v)));
        }
        if self.tau < 0.0 {
            return Err(Error::InvalidInput(format!("tau must be non-negative, got {}", self.tau)));
        }
        Ok(())
    }

    /// Quench start time `t0 = -2 τ`.
    pub fn t0(&self) -> f64 {
        -2.0 * self.tau
    }

    pub fn is_uniform(&self) -> bool {
        self.v.is_infinite()
    }
}

/// `f(x, t) = ½ + ½ tanh[(|x| - v t)/(v τ)]`.
///
/// Evaluated in the logistic form `1/(1 + e^{-2z})`, which is the same
/// function but does not cancel to zero for large negative arguments.
/// `τ = 0` is a sharp step and `v = ∞` the spatially uniform profile
/// `½ + ½ tanh(-t/τ)`.
pub fn front_profile(x: f64, t: f64, v: f64, tau: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    ensure_finite("t", t)?;
    ensure_finite("tau", tau)?;
    if v.is_nan() || v <= 0.0 {
        return Err(Error::InvalidInput(format!("front velocity must be positive, got {v}")));
    }
    if tau < 0.0 {
        return Err(Error::InvalidInput(format!("tau must be non-negative, got {tau}")));
    }
    if tau == 0.0 {
        let passed = if v.is_infinite() { t >= 0.0 } else { x.abs() <= v * t };
        return Ok(if passed { 0.0 } else { 1.0 });
    }
    let z = if v.is_infinite() { -t / tau } else { (x.abs() - v * t) / (v * tau) };
    Ok(1.0 / (1.0 + (-2.0 * z).exp()))
}

/// Instantaneous field `g_a(t) = J g_c + h f_a(t)` on one site.
pub fn transverse_field(
    geometry: &LatticeGeometry,
    site: usize,
    t: f64,
    params: &ModelParams,
) -> Result<f64> {
    if site >= geometry.n_sites() {
        return Err(Error::InvalidInput(format!("site {site} out of range")));
    }
    let (col, _) = geometry.site_coords(site);
    let f = front_profile(geometry.x_coord(col), t, params.v, params.tau)?;
    Ok(params.j * params.gc + params.h * f)
}

/// Fields on every site at time `t`.
pub fn fields_at(geometry: &LatticeGeometry, params: &ModelParams, t: f64) -> Result<Vec<f64>> {
    (0..geometry.n_sites())
        .map(|s| transverse_field(geometry, s, t, params))
        .collect()
}

/// Fields of the static Hamiltonian with uniform `g` (energy units).
pub fn uniform_fields(geometry: &LatticeGeometry, g: f64) -> Vec<f64> {
    vec![g; geometry.n_sites()]
}

fn check_fields(geometry: &LatticeGeometry, fields: &[f64]) -> Result<()> {
    if fields.len() != geometry.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "{} fields for {} sites",
            fields.len(),
            geometry.n_sites()
        )));
    }
    for &g in fields {
        ensure_finite("field", g)?;
    }
    Ok(())
}

/// `H = -J Σ_bonds σˣσˣ - Σ_a g_a σᶻ_a`.
pub fn tfi_hamiltonian(geometry: &LatticeGeometry, fields: &[f64], j: f64) -> Result<PauliSum> {
    check_fields(geometry, fields)?;
    let mut h = PauliSum::new(geometry.n_sites());
    for bond in geometry.bonds() {
        h.push(PauliString::two(-j, bond.a, Pauli::X, bond.b, Pauli::X)?)?;
    }
    for (site, &g) in fields.iter().enumerate() {
        if g != 0.0 {
            h.push(PauliString::one(-g, site, Pauli::Z))?;
        }
    }
    Ok(h)
}

/// Exact MPO for [`tfi_hamiltonian`].
pub fn hamiltonian_mpo<T: Scalar>(geometry: &LatticeGeometry, fields: &[f64], j: f64) -> Result<Mpo<T>> {
    Mpo::from_pauli_sum(&tfi_hamiltonian(geometry, fields, j)?)
}

/// Energy density operator `h_{i,j}` on the x-bond between columns `col`
/// and `col + 1` in row `row`.
#[derive(Debug, Clone)]
pub struct LocalEnergyTerm {
    pub col: usize,
    pub row: usize,
    /// Coordinate of the bond midpoint.
    pub x: f64,
    pub op: PauliSum,
}

/// Local energy operators whose sum is exactly `H`.
///
/// Every Hamiltonian term is shared equally among the x-bond operators it
/// touches: an x-bond belongs to its own `h_{i,j}`; the field on a site is
/// split between the (one or two) x-bonds of its column; a vertical bond
/// is split among the (two or four) `h` terms in rows `j` and `j+1` of the
/// adjacent x-bond columns. In the bulk this gives the weights ½ and ¼;
/// on the first and last columns it produces the boundary additions that
/// make the operators sum to `H`.
pub fn local_energy_operators(
    geometry: &LatticeGeometry,
    fields: &[f64],
    j: f64,
) -> Result<Vec<LocalEnergyTerm>> {
    if geometry.lx() < 2 {
        return Err(Error::Geometry("local energy operators need Lx >= 2".into()));
    }
    check_fields(geometry, fields)?;
    let (lx, ly) = (geometry.lx(), geometry.ly());
    let n = geometry.n_sites();
    let mut terms: Vec<LocalEnergyTerm> = Vec::with_capacity((lx - 1) * ly);
    for col in 0..lx - 1 {
        for row in 0..ly {
            terms.push(LocalEnergyTerm { col, row, x: geometry.x_cut_coord(col), op: PauliSum::new(n) });
        }
    }
    let slot = |col: usize, row: usize| col * ly + row;
    // x-bond columns adjacent to a site column
    let owners = |col: usize| -> Vec<usize> {
        let mut v = Vec::with_capacity(2);
        if col >= 1 {
            v.push(col - 1);
        }
        if col + 1 < lx {
            v.push(col);
        }
        v
    };

    for col in 0..lx - 1 {
        for row in 0..ly {
            let a = geometry.site_index(col, row);
            let b = geometry.site_index(col + 1, row);
            terms[slot(col, row)].op.push(PauliString::two(-j, a, Pauli::X, b, Pauli::X)?)?;
        }
    }
    for col in 0..lx {
        let cols = owners(col);
        let w = 1.0 / cols.len() as f64;
        for row in 0..ly {
            let site = geometry.site_index(col, row);
            let g = fields[site];
            if g == 0.0 {
                continue;
            }
            for &c in &cols {
                terms[slot(c, row)].op.push(PauliString::one(-g * w, site, Pauli::Z))?;
            }
        }
        for (r0, r1) in geometry.column_y_pairs() {
            let a = geometry.site_index(col, r0);
            let b = geometry.site_index(col, r1);
            let share = 1.0 / (2 * cols.len()) as f64;
            for &c in &cols {
                for r in [r0, r1] {
                    terms[slot(c, r)].op.push(PauliString::two(-j * share, a, Pauli::X, b, Pauli::X)?)?;
                }
            }
        }
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn front_profile_reference_values() {
        assert_eq!(front_profile(0.0, 0.0, 1.7, 0.4).unwrap(), 0.5);
        let f0 = front_profile(0.0, -0.8, 2.0, 0.4).unwrap();
        assert!((f0 - 0.982_013_790_0).abs() < 1e-10, "{f0}");
        let far = front_profile(3.0, 1e6, 1.0, 1.0).unwrap();
        assert!(far < 1e-300);
        assert!(front_profile(f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(front_profile(0.0, f64::INFINITY, 1.0, 1.0).is_err());
    }

    #[test]
    fn step_front_and_uniform_limit() {
        assert_eq!(front_profile(2.0, 1.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(front_profile(0.5, 1.0, 1.0, 0.0).unwrap(), 0.0);
        let u = front_profile(5.0, 0.3, f64::INFINITY, 0.4).unwrap();
        let expected = 0.5 + 0.5 * (-0.3f64 / 0.4).tanh();
        assert!((u - expected).abs() < 1e-15);
    }

    #[test]
    fn field_limits() {
        let g = LatticeGeometry::cylinder(5, 3).unwrap();
        let p = ModelParams::standard(GC_2D, 2.0, 0.4);
        let site = g.site_index(4, 1);
        assert!((transverse_field(&g, site, 1e6, &p).unwrap() - GC_2D).abs() < 1e-12);
        // front sits on x = 2 at t = 1
        let on_front = transverse_field(&g, site, 1.0, &p).unwrap();
        assert!((on_front - (GC_2D + p.h / 2.0)).abs() < 1e-12);
        let start = transverse_field(&g, site, p.t0(), &p).unwrap();
        assert!((start - (GC_2D + p.h)).abs() < 0.02 * p.h);
    }

    #[test]
    fn geometry_validation() {
        assert!(LatticeGeometry::new(4, 1, true).is_err());
        assert!(LatticeGeometry::new(0, 3, true).is_err());
        let two = LatticeGeometry::cylinder(3, 2).unwrap();
        assert_eq!(two.bonds().iter().filter(|b| b.kind != BondKind::X).count(), 3);
        let three = LatticeGeometry::cylinder(3, 3).unwrap();
        assert_eq!(three.bonds().iter().filter(|b| b.kind == BondKind::Wrap).count(), 3);
        assert_eq!(three.bonds().len(), 2 * 3 + 3 * 3);
    }

    #[test]
    fn coordinates_are_centered() {
        for lx in 2..9 {
            let g = LatticeGeometry::cylinder(lx, 3).unwrap();
            for c in 0..lx {
                assert_eq!(g.x_coord(c), -g.x_coord(lx - 1 - c));
            }
        }
        let odd = LatticeGeometry::chain(7).unwrap();
        assert_eq!(odd.x_coord(odd.center_col()), 0.0);
    }

    #[test]
    fn bonds_are_unique_and_span_at_most_ly() {
        for (lx, ly) in [(2, 1), (4, 2), (3, 3), (3, 4), (2, 6), (5, 5)] {
            let g = LatticeGeometry::cylinder(lx, ly).or_else(|_| LatticeGeometry::chain(lx)).unwrap();
            let bonds = g.bonds();
            let mut seen = std::collections::HashSet::new();
            for b in &bonds {
                assert!(b.a < b.b);
                assert!(b.b - b.a <= ly);
                assert!(seen.insert((b.a, b.b)), "duplicate bond {b:?}");
            }
        }
    }

    #[test]
    fn single_bond_local_term_is_whole_hamiltonian() {
        let g = LatticeGeometry::chain(2).unwrap();
        let fields = [1.0, 1.0];
        let h = tfi_hamiltonian(&g, &fields, 1.0).unwrap();
        let terms = local_energy_operators(&g, &fields, 1.0).unwrap();
        assert_eq!(terms.len(), 1);
        let mut a = terms[0].op.simplified().terms;
        let mut b = h.simplified().terms;
        a.sort_by(|x, y| x.ops.cmp(&y.ops));
        b.sort_by(|x, y| x.ops.cmp(&y.ops));
        assert_eq!(a, b);
    }

    #[test]
    fn local_terms_sum_to_hamiltonian_symbolically() {
        for (lx, ly, periodic) in [(3, 3, true), (4, 2, true), (5, 1, false), (3, 4, true), (2, 6, true)] {
            let g = LatticeGeometry::new(lx, ly, periodic).unwrap();
            let fields: Vec<f64> = (0..g.n_sites()).map(|s| 1.0 + 0.1 * s as f64).collect();
            let h = tfi_hamiltonian(&g, &fields, 1.3).unwrap().simplified();
            let mut sum = PauliSum::new(g.n_sites());
            for t in local_energy_operators(&g, &fields, 1.3).unwrap() {
                sum.extend(&t.op).unwrap();
            }
            let sum = sum.simplified();
            assert_eq!(sum.terms.len(), h.terms.len());
            for term in &h.terms {
                let other = sum.terms.iter().find(|t| t.ops == term.ops).unwrap();
                assert!((other.coef - term.coef).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bulk_weights_match_quarter_rule() {
        let g = LatticeGeometry::cylinder(4, 4).unwrap();
        let fields = vec![2.0; g.n_sites()];
        let terms = local_energy_operators(&g, &fields, 1.0).unwrap();
        let bulk = &terms[4 + 2]; // col 1, row 2
        let a = g.site_index(1, 2);
        let b = g.site_index(1, 3);
        let vertical = bulk.op.terms.iter().find(|t| t.ops == vec![(a, Pauli::X), (b, Pauli::X)]).unwrap();
        assert_eq!(vertical.coef, -0.25);
        let z = bulk.op.terms.iter().find(|t| t.ops == vec![(a, Pauli::Z)]).unwrap();
        assert_eq!(z.coef, -1.0);
    }
}
