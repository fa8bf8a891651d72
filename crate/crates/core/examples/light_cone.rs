//! Light-cone velocity of the critical chain from the entanglement front
//! after a local kick.

use quench2d::dmrg::DmrgSettings;
use quench2d::lattice::LatticeGeometry;
use quench2d::quench::{light_cone_experiment, Kick, LightConeSettings};
use quench2d::tdvp::TdvpSettings;

fn main() -> quench2d::Result<()> {
    let geom = LatticeGeometry::chain(24)?;
    let tdvp = TdvpSettings { chi_max: 48, ..TdvpSettings::default() };
    let settings = LightConeSettings {
        dmrg: DmrgSettings::with_chi(48),
        tdvp,
        t_max: 3.5,
        measure_every: 0.1,
        threshold: 0.02,
        kick: Kick::SigmaX,
    };
    let cone = light_cone_experiment(&geom, 1.0, 1.0, (geom.center_col(), 0), Some(Kick::SigmaX), &settings)?;
    for (t, row) in cone.times.iter().zip(&cone.entropy).step_by(5) {
        let line: String = row.iter().map(|s| if *s - cone.entropy[0][0] > 0.3 { '#' } else { '.' }).collect();
        println!("t = {t:4.1} {line}");
    }
    match cone.velocity {
        Some(v) => println!("c = {:.3} +- {:.3} (exact 2)", v.c, v.uncertainty),
        None => println!("no front found"),
    }
    Ok(())
}
