//! Local energy densities of a random state add up to the total energy.

use quench2d::dmrg::local_energies;
use quench2d::lattice::{fields_at, hamiltonian_mpo, LatticeGeometry, ModelParams};
use quench2d::mps::{env::contract_expectation, Mps};

fn main() -> quench2d::Result<()> {
    let geom = LatticeGeometry::cylinder(4, 3)?;
    let params = ModelParams::standard(2.5, 2.0, 0.4);
    let fields = fields_at(&geom, &params, 0.2)?;
    let state = Mps::<f64>::random(geom.n_sites(), 16, 7)?;
    let local = local_energies(&state, &geom, &fields, 1.0)?;
    for v in &local {
        println!("col {} row {} x = {:5.1}  <h> = {:+.10}", v.col, v.row, v.x, v.value);
    }
    let sum: f64 = local.iter().map(|v| v.value).sum();
    let total = contract_expectation(&state, &hamiltonian_mpo::<f64>(&geom, &fields, 1.0)?);
    println!("sum = {sum:.12}, <H> = {total:.12}, difference {:.1e}", (sum - total).abs());
    Ok(())
}
