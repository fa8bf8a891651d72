//! Exact-regime TDVP against dense time-ordered evolution on a 2 x 4
//! cylinder.

use quench2d::lattice::{LatticeGeometry, ModelParams};
use quench2d::quench::{run_quench, run_quench_oracle, QuenchProtocol, QuenchSettings};

fn main() -> quench2d::Result<()> {
    let geom = LatticeGeometry::cylinder(4, 2)?;
    let protocol = QuenchProtocol::new(geom, ModelParams::standard(2.0859, 2.0, 0.4));
    let dt = 0.01;
    let (mps, _) = run_quench(&protocol, &QuenchSettings::exact(dt, 4), None, None)?;
    let exact = run_quench_oracle(&protocol, dt, 0.01)?;
    let worst = |f: &dyn Fn(usize) -> f64, n: usize| (0..n).map(f).fold(0.0f64, f64::max);
    let de = worst(&|i| (mps.energy[i].eps - exact.energy[i].eps).abs(), mps.energy.len());
    let ds = worst(&|i| (mps.entropy[i].svn - exact.entropy[i].svn).abs(), mps.entropy.len());
    let dl = worst(&|i| (mps.local[i].eps - exact.local[i].eps).abs(), mps.local.len());
    let dc = worst(&|i| (mps.correlations[i].cx - exact.correlations[i].cx).abs(), mps.correlations.len());
    println!("{} measurement times up to tq = {:.3}", mps.energy.len(), mps.tq);
    println!("max |d eps(t)| = {de:.2e}\nmax |d S|      = {ds:.2e}\nmax |d eps(x)| = {dl:.2e}\nmax |d Cx|     = {dc:.2e}");
    Ok(())
}
