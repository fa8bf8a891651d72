//! Finite-size collapse of free-fermion chain gaps, and the fitted critical
//! point and exponent.

use quench2d::analysis::{fit_gap_collapse, gap_collapse, GapPoint};
use quench2d::ed::FreeFermionChain;

fn main() -> quench2d::Result<()> {
    let mut data = Vec::new();
    for l in (8..=32).step_by(8) {
        for k in 0..=60 {
            let g = 1.0 + (-1.0 + 4.0 * k as f64 / 60.0) / l as f64;
            data.push(GapPoint { ly: l, g, gap: FreeFermionChain::new(l, g, 1.0)?.gap() });
        }
    }
    for (gc, nu) in [(1.0, 1.0), (1.05, 1.0), (1.0, 0.8)] {
        println!("gc = {gc:4.2} nu = {nu:3.1}: residual {:.3e}", gap_collapse(&data, gc, nu, 1.0)?.residual);
    }
    let fit = fit_gap_collapse(&data, 1.0, (1.1, 0.9))?;
    println!("fit: gc = {:.4}, nu = {:.4}, residual {:.3e}", fit.gc, fit.nu, fit.residual);
    Ok(())
}
