use serde::Serialize;

use super::fit::linear_fit;
use super::pseudo_critical_field;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontVelocity {
    pub c: f64,
    pub uncertainty: f64,
    pub intercept: f64,
    /// `(t, distance of the front from the kick)` used in the fit.
    pub front: Vec<(f64, f64)>,
}

/// Front distance per time: the farthest cut from `origin` where
/// `S(t) - S(0)` exceeds `threshold`. Times with no crossing, or with the
/// front already at the outermost cut, are dropped.
fn front_track(times: &[f64], x: &[f64], entropy: &[Vec<f64>], origin: f64, threshold: f64) -> Vec<(f64, f64)> {
    let base = &entropy[0];
    let reach = x.iter().map(|&v| (v - origin).abs()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for (t, row) in times.iter().zip(entropy).skip(1) {
        let d = row
            .iter()
            .zip(base)
            .zip(x)
            .filter(|((s, s0), _)| *s - *s0 > threshold)
            .map(|(_, &xv)| (xv - origin).abs())
            .fold(f64::NEG_INFINITY, f64::max);
        if d.is_finite() && d < reach {
            out.push((*t, d));
        }
    }
    out
}

fn slope_of(track: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if track.len() < 3 {
        return Err(Error::NoFront(format!("{} usable front positions", track.len())));
    }
    let (t, d): (Vec<f64>, Vec<f64>) = track.iter().copied().unzip();
    let f = linear_fit(&t, &d, None)?;
    Ok((f.slope, f.intercept, f.sigma_slope))
}

/// Light-cone velocity from an entropy map `entropy[time][cut]` recorded at
/// cut positions `x` after a kick at `origin`.
///
/// The uncertainty combines the slope error of the fit with the spread of
/// slopes obtained at 0.8 and 1.2 times the threshold.
pub fn velocity_from_front(
    times: &[f64],
    x: &[f64],
    entropy: &[Vec<f64>],
    origin: f64,
    threshold: f64,
) -> Result<FrontVelocity> {
    if times.len() != entropy.len() || entropy.iter().any(|r| r.len() != x.len()) || times.is_empty() {
        return Err(Error::InvalidInput("entropy map does not match its axes".into()));
    }
    if threshold <= 0.0 {
        return Err(Error::InvalidInput("threshold must be positive".into()));
    }
    let front = front_track(times, x, entropy, origin, threshold);
    let (c, intercept, sigma) = slope_of(&front)?;
    let mut spread = 0.0f64;
    for factor in [0.8, 1.2] {
        if let Ok((ci, _, _)) = slope_of(&front_track(times, x, entropy, origin, factor * threshold)) {
            spread = spread.max((ci - c).abs());
        }
    }
    Ok(FrontVelocity { c, uncertainty: sigma.hypot(spread), intercept, front })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LightSpeedFit {
    pub a: f64,
    pub c_inf: f64,
    pub sigma_a: f64,
    pub sigma_c_inf: f64,
}

/// Linear fit `c(Ly) = a·gc(Ly) + c_inf` over `(Ly, c, σ_c)` triples.
pub fn light_speed_extrapolation(points: &[(usize, f64, f64)]) -> Result<LightSpeedFit> {
    let x: Vec<f64> = points.iter().map(|p| pseudo_critical_field(p.0)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let s: Vec<f64> = points.iter().map(|p| p.2).collect();
    let weights = s.iter().all(|&v| v > 0.0).then_some(s.as_slice());
    let f = linear_fit(&x, &y, weights)?;
    Ok(LightSpeedFit { a: f.slope, c_inf: f.intercept, sigma_a: f.sigma_slope, sigma_c_inf: f.sigma_intercept })
}
