//! Heat-wave energy profile behind a front moving at twice the light speed.

use quench2d::heatwave::{doppler_cold_hot_ratio, spatial_energy_profile, EventGrid, HeatwaveParams};

fn main() -> quench2d::Result<()> {
    let params = HeatwaveParams::new(1.0, 2.0, 1.0);
    let half = 8.0;
    let tq = half / params.v;
    let x: Vec<f64> = (0..=32).map(|i| -half + 0.5 * i as f64).collect();
    let (profile, total) = spatial_energy_profile(&x, tq, &params, EventGrid::default())?;
    let profile = profile.normalized(1.0)?;
    for (x, e) in profile.x.iter().zip(&profile.eps) {
        println!("x = {x:5.1}  {e:6.3} {}", "*".repeat((e * 40.0).round() as usize));
    }
    println!("emitted energy {total:.4e}");
    println!(
        "cold/hot = {:.3}, Doppler estimate {:.3}",
        profile.cold_value().unwrap_or(f64::NAN),
        doppler_cold_hot_ratio(params.beta())?
    );
    Ok(())
}
