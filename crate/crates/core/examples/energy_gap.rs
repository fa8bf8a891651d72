//! Lowest gap across the transition on an Ly = 2 ladder.

use quench2d::analysis::pseudo_critical_field;
use quench2d::dmrg::{energy_gap, DmrgSettings};
use quench2d::lattice::{hamiltonian_mpo, uniform_fields, LatticeGeometry};

fn main() -> quench2d::Result<()> {
    let geom = LatticeGeometry::cylinder(8, 2)?;
    let gc = pseudo_critical_field(2);
    println!("Ly = 2 pseudo-critical field {gc:.5}");
    println!("{:>8} {:>14} {:>12} {:>10}", "g", "E0", "gap", "gap*Lx");
    for g in [1.0, 1.5, gc, 2.5, 3.5] {
        let mpo = hamiltonian_mpo::<f64>(&geom, &uniform_fields(&geom, g), 1.0)?;
        let r = energy_gap(&mpo, &DmrgSettings::with_chi(48))?;
        println!("{g:8.4} {:14.8} {:12.6e} {:10.4}", r.e0, r.gap, r.gap * geom.lx() as f64);
    }
    Ok(())
}
