//! Spatiotemporal quench on an Ly = 2 ladder: energy above the
//! instantaneous ground state, and the local profile at the arrival time.
//!
//! cargo run --release --example quench_ladder -- 3.0

use quench2d::analysis::pseudo_critical_field;
use quench2d::lattice::{LatticeGeometry, ModelParams};
use quench2d::quench::{run_quench, QuenchProtocol, QuenchSettings};
use quench2d::tdvp::TdvpSettings;

fn main() -> quench2d::Result<()> {
    let v: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3.0);
    let geom = LatticeGeometry::cylinder(12, 2)?;
    let protocol = QuenchProtocol::new(geom, ModelParams::standard(pseudo_critical_field(2), v, 0.4));
    let tdvp = TdvpSettings { chi_max: 96, ..TdvpSettings::default() };
    let settings = QuenchSettings { tdvp, ..QuenchSettings::default() };
    let (series, state) = run_quench(&protocol, &settings, None, None)?;

    println!("v = {v}, tq = {:.4}, final chi = {}", series.tq, state.max_bond_dim());
    for r in series.energy.iter().step_by(10) {
        println!("t = {:6.3}  E - E0 = {:.6e}", r.t, r.eps);
    }
    println!("profile at tq (row-averaged):");
    let at_tq = series.local_at(series.tq);
    let mut xs: Vec<f64> = at_tq.iter().map(|r| r.x).collect();
    xs.dedup();
    for x in xs {
        let vals: Vec<f64> = at_tq.iter().filter(|r| r.x == x).map(|r| r.eps).collect();
        println!("x = {x:5.1}  eps = {:.4e}", vals.iter().sum::<f64>() / vals.len() as f64);
    }
    if let Some(c) = series.central_mean(series.tq, &geom) {
        println!("central-region mean {c:.4e}");
    }
    Ok(())
}
