//! Open Ising chain: DMRG against the Jordan-Wigner solution.

use quench2d::dmrg::{ground_state, DmrgSettings};
use quench2d::ed::FreeFermionChain;
use quench2d::lattice::{hamiltonian_mpo, uniform_fields, LatticeGeometry};
use quench2d::mps::MeasureCache;
use quench2d::ops::Pauli;

fn main() -> quench2d::Result<()> {
    let (l, g) = (24, 1.2);
    let geom = LatticeGeometry::chain(l)?;
    let mpo = hamiltonian_mpo::<f64>(&geom, &uniform_fields(&geom, g), 1.0)?;
    let mut settings = DmrgSettings::with_chi(64);
    settings.cutoff = 1e-14;
    let gs = ground_state(&mpo, &settings, None)?;
    let ff = FreeFermionChain::new(l, g, 1.0)?;
    println!("E0: DMRG {:.13}  free fermions {:.13}", gs.energy, ff.ground_energy());
    println!("gap (free fermions) {:.6}, bandwidth {:.6}", ff.gap(), ff.bandwidth());

    let x = Pauli::X.matrix();
    let origin = 6;
    let targets: Vec<usize> = (origin + 1..origin + 12).collect();
    let row = MeasureCache::new(&gs.state)?.correlation_row(&x, origin, &x, &targets)?;
    println!("{:>3} {:>14} {:>14}", "r", "Cxx DMRG", "Cxx exact");
    for (&j, c) in targets.iter().zip(row) {
        println!("{:3} {c:14.10} {:14.10}", j - origin, ff.sxsx(origin, j)?);
    }
    Ok(())
}
