//! Convergence order of the second- and fourth-order TDVP integrators.

use ndarray::Array1;
use quench2d::lattice::{hamiltonian_mpo, uniform_fields, LatticeGeometry};
use quench2d::mps::Mps;
use quench2d::tdvp::{step, TdvpMode, TdvpSettings};
use quench2d::C64;

fn main() -> quench2d::Result<()> {
    let n = 10;
    let geom = LatticeGeometry::chain(n)?;
    let mpo = hamiltonian_mpo::<C64>(&geom, &uniform_fields(&geom, 1.0), 1.0)?;
    let mpo_at = |_t: f64| Ok(mpo.clone());
    let start = Mps::<C64>::random(n, 6, 5)?;
    let settings = |dt: f64, order: u8| {
        let mut s = TdvpSettings::exact(dt, order);
        s.mode = TdvpMode::OneSite;
        s
    };
    for order in [2u8, 4] {
        let mut previous: Option<f64> = None;
        for dt in [0.1, 0.05, 0.025] {
            let mut reference = start.clone();
            let fine = settings(dt / 64.0, 4);
            for i in 0..64 {
                step(&mut reference, &mpo_at, i as f64 * fine.dt, fine.dt, &fine)?;
            }
            let mut psi = start.clone();
            step(&mut psi, &mpo_at, 0.0, dt, &settings(dt, order))?;
            let diff: Array1<C64> = psi.to_dense()? - reference.to_dense()?;
            let err = diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            match previous {
                Some(p) => println!("order {order} dt = {dt:6.4}: error {err:.3e}, ratio {:.2}", p / err),
                None => println!("order {order} dt = {dt:6.4}: error {err:.3e}"),
            }
            previous = Some(err);
        }
    }
    Ok(())
}
