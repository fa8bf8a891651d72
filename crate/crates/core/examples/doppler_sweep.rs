//! Doppler model: angular emission and central-region energy versus front
//! velocity.

use std::f64::consts::PI;

use quench2d::heatwave::{angular_energy_density, total_energy_vs_velocity, HeatwaveParams};

fn main() -> quench2d::Result<()> {
    let base = HeatwaveParams::new(1.0, 2.0, 1.0);
    println!("angular emission at v = 2c:");
    for k in 0..=6 {
        let theta = PI * k as f64 / 6.0;
        println!("  theta = {theta:5.3}  eps = {:.4e}", angular_energy_density(theta, &base)?);
    }
    let vs = [1.1, 1.5, 2.0, 3.0, 5.0, 10.0, f64::INFINITY];
    println!("central-region mean energy (|x| < 2) on a length-16 system:");
    for (v, e) in total_energy_vs_velocity(&vs, &base, 8.0, Some(2.0))? {
        println!("  v = {v:6.1}  eps = {e:.4e}");
    }
    Ok(())
}
