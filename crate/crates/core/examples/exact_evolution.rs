//! Dense spectrum and time-ordered Krylov evolution of a small cylinder
//! under the moving front.

use quench2d::ed::{dense_entropy, dense_spectrum, krylov_evolve, DenseOperator};
use quench2d::lattice::{fields_at, tfi_hamiltonian, LatticeGeometry, ModelParams};
use quench2d::C64;

fn main() -> quench2d::Result<()> {
    let geom = LatticeGeometry::cylinder(3, 2)?;
    let params = ModelParams::standard(2.0, 2.0, 0.4);
    let h_at = |t: f64| tfi_hamiltonian(&geom, &fields_at(&geom, &params, t)?, params.j);
    let t0 = params.t0();
    let spectrum = dense_spectrum(&h_at(t0)?, 4)?;
    println!("lowest levels at t0 = {t0}: {:?}", spectrum.values);

    let mut psi = spectrum.vectors[0].mapv(C64::from);
    let mut t = t0;
    for k in 1..=8 {
        let next = t0 + 0.2 * k as f64;
        psi = krylov_evolve(&psi, h_at, t, next, 0.01)?;
        t = next;
        let h = DenseOperator::new(&h_at(t)?)?;
        let e0 = dense_spectrum(&h_at(t)?, 1)?.values[0];
        let e = h.expectation(&psi);
        println!("t = {t:5.2}  E - E0 = {:.6e}  S(mid) = {:.6}", e - e0, dense_entropy(&psi, geom.n_sites(), 2)?);
    }
    Ok(())
}
