//! DMRG ground state of a uniform cylinder, checked against exact
//! diagonalization.
//!
//! cargo run --release --example ground_state -- 4 3 3.0

use quench2d::dmrg::{ground_state, DmrgSettings};
use quench2d::ed::dense_spectrum;
use quench2d::lattice::{hamiltonian_mpo, tfi_hamiltonian, uniform_fields, LatticeGeometry};

fn main() -> quench2d::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let lx: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(4);
    let ly: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let g: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3.0);

    let geom = LatticeGeometry::cylinder(lx, ly)?;
    let fields = uniform_fields(&geom, g);
    let mpo = hamiltonian_mpo::<f64>(&geom, &fields, 1.0)?;
    let gs = ground_state(&mpo, &DmrgSettings::with_chi(64), None)?;
    for s in &gs.sweeps {
        println!("sweep {:2}  E = {:.12}  chi = {:3}  trunc = {:.1e}", s.sweep, s.energy, s.max_chi, s.max_trunc_err);
    }
    println!("E0 / N = {:.12}", gs.energy / geom.n_sites() as f64);
    if geom.n_sites() <= 14 {
        let exact = dense_spectrum(&tfi_hamiltonian(&geom, &fields, 1.0)?, 1)?.values[0];
        println!("exact E0 = {exact:.12}, relative difference {:.1e}", (gs.energy - exact).abs() / exact.abs());
    }
    Ok(())
}
