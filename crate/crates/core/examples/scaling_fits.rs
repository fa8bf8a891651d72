//! Width extrapolations: ground-energy power law, entropy area law and the
//! light-speed fit.

use quench2d::analysis::{
    energy_density_scaling_fit, entropy_area_law_fit, light_speed_extrapolation, pseudo_critical_field, CRITICAL,
};

fn main() -> quench2d::Result<()> {
    let ly = [2.0, 3.0, 4.0, 5.0, 6.0];
    let eps: Vec<f64> = ly.iter().map(|&l: &f64| -3.1 + 0.8 * l.powf(-CRITICAL.energy_exponent())).collect();
    let p = energy_density_scaling_fit(&ly, &eps)?;
    println!("eps0 = {:.5} + {:.4} Ly^-{:.4}  (+- {:.1e}, {:.1e}, {:.1e})", p.q, p.b, p.p, p.sigma_q, p.sigma_b, p.sigma_p);

    let s: Vec<f64> = ly.iter().map(|&l: &f64| 0.21 * l - 0.05 * l.ln() + 0.12).collect();
    let a = entropy_area_law_fit(&ly, &s)?;
    println!("S = {:.4} Ly + {:.4} ln Ly + {:.4}, F = {:.2e}", a.a, a.b, a.c, a.f_statistic);

    let speeds: Vec<(usize, f64, f64)> = (2..=5).map(|w| (w, 0.9 * pseudo_critical_field(w) + 0.4, 0.02)).collect();
    let c = light_speed_extrapolation(&speeds)?;
    println!("c(Ly) = {:.3} gc(Ly) + {:.3}, c_inf = {:.3} +- {:.3}", c.a, c.c_inf, c.a * CRITICAL.gc_inf + c.c_inf, c.sigma_c_inf);
    Ok(())
}
