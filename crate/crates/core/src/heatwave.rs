//! Free-boson heatwave model of a superluminal quench front.
//!
//! A front moving at `v > c` emits bosons whose occupation is Doppler
//! shifted by `η(θ) = γ(1 - β cos θ)`, `θ` being the emission angle relative
//! to the front's velocity. Waves emitted against the front (`θ ≈ π`) are
//! red-shifted and leave a cold interior; waves emitted along it are
//! blue-shifted and heat the region `c·t < |x| < v·t`.
//!
//! Lengths and times follow the lattice; `c` enters explicitly.

use quadrature::double_exponential::integrate;
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatwaveParams {
    /// Speed of light of the critical theory.
    pub c: f64,
    /// Front velocity; `f64::INFINITY` for a uniform quench.
    pub v: f64,
    /// Gap of the pre-quench Hamiltonian.
    pub m: f64,
    /// Front smoothing time; 0 disables the UV cutoff `1/τ`.
    pub tau: f64,
    /// Length scale of the mode density `1/L²`.
    pub length: f64,
    /// Hard momentum cutoff (lattice scale); `f64::INFINITY` for none.
    pub lambda: f64,
}

impl HeatwaveParams {
    pub fn new(c: f64, v: f64, m: f64) -> Self {
        Self { c, v, m, tau: 0.0, length: 1.0, lambda: f64::INFINITY }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidInput("c must be positive".into()));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidInput("m must be positive".into()));
        }
        if !(self.tau >= 0.0) || !(self.length > 0.0) || !(self.lambda > 0.0) {
            return Err(Error::InvalidInput("τ ≥ 0, L > 0 and Λ > 0 required".into()));
        }
        if !(self.v > self.c) {
            return Err(Error::InvalidInput(format!("front velocity {} must exceed c = {}", self.v, self.c)));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        if self.v.is_infinite() {
            0.0
        } else {
            self.c / self.v
        }
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.beta().powi(2)).sqrt()
    }
}

/// `η(θ) = γ(1 - β cos θ)`.
pub fn doppler_factor(theta: f64, beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidInput(format!("β = {beta} outside [0, 1)")));
    }
    if !(0.0..=std::f64::consts::PI + 1e-12).contains(&theta) {
        return Err(Error::InvalidInput(format!("θ = {theta} outside [0, π]")));
    }
    Ok((1.0 - beta * theta.cos()) / (1.0 - beta * beta).sqrt())
}

/// Occupation of the mode with momentum `k` emitted at `θ`.
///
/// Below the crossover `η ω_k = m` it is `m / (4 η ω_k)`; above it decays
/// as `¼·exp(-2(η ω_k - m)/m)`, which is continuous at the crossover.
pub fn mode_population(k: f64, theta: f64, params: &HeatwaveParams) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let beta = params.beta();
    if beta >= 1.0 {
        return Ok(0.0);
    }
    let e = doppler_factor(theta, beta)? * params.c * k;
    if !e.is_finite() {
        return Ok(0.0);
    }
    Ok(if e <= params.m { params.m / (4.0 * e) } else { 0.25 * (-2.0 * (e - params.m) / params.m).exp() })
}

/// Momentum cutoff of the angular integral, `min(m/(cη), 1/(cτ), Λ)`.
fn momentum_cutoff(eta: f64, params: &HeatwaveParams) -> f64 {
    let ir = params.m / (params.c * eta);
    let uv = if params.tau > 0.0 { 1.0 / (params.c * params.tau) } else { f64::INFINITY };
    ir.min(uv).min(params.lambda)
}

/// Energy per unit area radiated at angle `θ`,
/// `ε(θ) = L⁻² ∫₀^K ω_k N_θ(k) k dk`.
///
/// With `K = m/(cη)` this is `m³ / (8 c² η³ L²)`; when the `1/τ` cutoff is
/// active it is `m K² / (8 η L²)`.
pub fn angular_energy_density(theta: f64, params: &HeatwaveParams) -> Result<f64> {
    let eta = doppler_factor(theta, params.beta())?;
    let k = momentum_cutoff(eta, params);
    Ok(params.m * k * k / (8.0 * eta * params.length.powi(2)))
}

/// [`angular_energy_density`] by direct quadrature of the population.
pub fn angular_energy_density_quadrature(theta: f64, params: &HeatwaveParams, tol: f64) -> Result<f64> {
    let eta = doppler_factor(theta, params.beta())?;
    let k_max = momentum_cutoff(eta, params);
    let failure = std::cell::RefCell::new(None);
    let out = integrate(
        |k| {
            if k <= 0.0 {
                return 0.0;
            }
            match mode_population(k, theta, params) {
                Ok(n) => params.c * k * n * k,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        0.0,
        k_max,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(out.integral / params.length.powi(2))
}

/// Angle where the `1/τ` cutoff takes over, if inside `(0, π)`.
fn cutoff_kink(params: &HeatwaveParams) -> Option<f64> {
    if params.tau <= 0.0 {
        return None;
    }
    // m/(cη) = 1/(cτ)  ⇔  η = m τ
    let (beta, gamma) = (params.beta(), params.gamma());
    if beta == 0.0 {
        return None;
    }
    let cos = (1.0 - params.m * params.tau / gamma) / beta;
    (cos > -1.0 && cos < 1.0).then(|| cos.acos())
}

/// `∫_a^b ε(θ) dθ`, split at the cutoff kink.
pub fn angular_integral(a: f64, b: f64, params: &HeatwaveParams, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut cuts = vec![a];
    if let Some(k) = cutoff_kink(params) {
        if k > a && k < b {
            cuts.push(k);
        }
    }
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let out = integrate(
            |th| angular_energy_density(th.clamp(0.0, std::f64::consts::PI), params).unwrap_or(f64::NAN),
            w[0],
            w[1],
            tol,
        );
        if !out.integral.is_finite() {
            return Err(Error::InvalidInput("angular integrand is not finite".into()));
        }
        total += out.integral;
    }
    Ok(total)
}

/// Energy deposited per unit length swept by the front,
/// `(1/π) ∫₀^π ε(θ) dθ`.
pub fn emitted_energy_per_length(params: &HeatwaveParams, tol: f64) -> Result<f64> {
    Ok(angular_integral(0.0, std::f64::consts::PI, params, tol)? / std::f64::consts::PI)
}

/// Theoretical energy density on a grid of `x` at time `tq`.
#[derive(Debug, Clone, Serialize)]
pub struct SpatialProfile {
    pub x: Vec<f64>,
    pub eps: Vec<f64>,
    pub tq: f64,
    pub c: f64,
    pub v: f64,
}

impl SpatialProfile {
    fn mean_where(&self, keep: impl Fn(f64) -> bool) -> Option<f64> {
        let vals: Vec<f64> = self.x.iter().zip(&self.eps).filter(|(x, _)| keep(x.abs())).map(|(_, e)| *e).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Mean over `c·tq < |x| < v·tq`.
    pub fn hot_value(&self) -> Option<f64> {
        let (lo, hi) = (self.c * self.tq, self.v * self.tq);
        self.mean_where(|a| a > lo && a < hi)
    }

    /// Mean over `|x| ≤ c·tq / 4`, or the innermost point when none qualifies.
    pub fn cold_value(&self) -> Option<f64> {
        let lim = 0.25 * self.c * self.tq;
        self.mean_where(|a| a <= lim).or_else(|| {
            let inner = self.x.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            self.mean_where(|a| a <= inner)
        })
    }

    /// Rescale so the hot plateau equals `reference`.
    pub fn normalized(&self, reference: f64) -> Result<SpatialProfile> {
        let hot = self.hot_value().filter(|h| *h > 0.0).ok_or_else(|| Error::InvalidInput("no hot plateau on the grid".into()))?;
        let mut out = self.clone();
        out.eps.iter_mut().for_each(|e| *e *= reference / hot);
        Ok(out)
    }

    /// `∫ ε dx` with the node widths used for binning.
    pub fn integral(&self) -> f64 {
        node_widths(&self.x).iter().zip(&self.eps).map(|(w, e)| w * e).sum()
    }
}

fn node_widths(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            if n == 1 {
                1.0
            } else {
                0.5 * (left + right)
            }
        })
        .collect()
}

/// Resolution of the emission-event discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventGrid {
    pub events: usize,
    pub angles: usize,
}

impl Default for EventGrid {
    fn default() -> Self {
        Self { events: 400, angles: 720 }
    }
}

/// Emission-event picture of the energy profile at time `tq`.
///
/// The two fronts sit at `±v t_e` for event times `t_e ∈ [0, tq]`; each
/// event deposits `v dt_e ε(θ) dφ / 2π` on the circle of radius
/// `c (tq - t_e)`, projected on `x` (the strip is uniform in `y`) and
/// binned with cloud-in-cell weights onto the sorted grid. Returns the
/// profile and the total deposited energy per unit `y`.
pub fn spatial_energy_profile(
    x_grid: &[f64],
    tq: f64,
    params: &HeatwaveParams,
    grid: EventGrid,
) -> Result<(SpatialProfile, f64)> {
    params.validate()?;
    if !(tq > 0.0) {
        return Err(Error::InvalidInput("tq must be positive".into()));
    }
    if x_grid.len() < 2 || x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("x grid must be strictly increasing with two points".into()));
    }
    if grid.events == 0 || grid.angles == 0 {
        return Err(Error::InvalidInput("event grid must be non-empty".into()));
    }
    let n = x_grid.len();
    let mut mass = vec![0.0; n];
    let mut total = 0.0;
    let (x0, x1) = (x_grid[0], x_grid[n - 1]);
    let mut deposit = |x: f64, w: f64| {
        total += w;
        let xc = x.clamp(x0, x1);
        let k = x_grid.partition_point(|&g| g <= xc).clamp(1, n - 1);
        let (a, b) = (x_grid[k - 1], x_grid[k]);
        let f = ((xc - a) / (b - a)).clamp(0.0, 1.0);
        mass[k - 1] += w * (1.0 - f);
        mass[k] += w * f;
    };
    if params.v.is_infinite() {
        let q = emitted_energy_per_length(params, 1e-12)?;
        // every point is swept at once; deposit the isotropic density in place
        let widths = node_widths(x_grid);
        let eps = widths.iter().map(|_| q).collect();
        let prof = SpatialProfile { x: x_grid.to_vec(), eps, tq, c: params.c, v: params.v };
        let total = q * widths.iter().sum::<f64>();
        return Ok((prof, total));
    }
    let dphi = 2.0 * std::f64::consts::PI / grid.angles as f64;
    let weights: Vec<(f64, f64)> = (0..grid.angles)
        .map(|a| {
            let phi = -std::f64::consts::PI + (a as f64 + 0.5) * dphi;
            let theta = phi.abs();
            Ok((theta.cos(), angular_energy_density(theta, params)? * dphi / (2.0 * std::f64::consts::PI)))
        })
        .collect::<Result<_>>()?;
    let dt = tq / grid.events as f64;
    for e in 0..grid.events {
        let te = (e as f64 + 0.5) * dt;
        let (xf, r) = (params.v * te, params.c * (tq - te));
        for &(cos, w) in &weights {
            let w = w * params.v * dt;
            deposit(xf + r * cos, w);
            deposit(-xf - r * cos, w);
        }
    }
    let widths = node_widths(x_grid);
    let eps = mass.iter().zip(&widths).map(|(m, w)| m / w).collect();
    Ok((SpatialProfile { x: x_grid.to_vec(), eps, tq, c: params.c, v: params.v }, total))
}

/// Mean energy density over `|x| < half_width` at `tq = half_length / v`,
/// by nested quadrature over event times and emission angles.
pub fn region_average(params: &HeatwaveParams, half_length: f64, half_width: f64, tol: f64) -> Result<f64> {
    params.validate()?;
    if !(half_length > 0.0 && half_width > 0.0) {
        return Err(Error::InvalidInput("lengths must be positive".into()));
    }
    let w = half_width.min(half_length);
    if params.v.is_infinite() {
        return emitted_energy_per_length(params, tol);
    }
    let (v, c) = (params.v, params.c);
    let tq = half_length / v;
    let pi = std::f64::consts::PI;
    let inner = |te: f64| -> Result<f64> {
        let (xf, r) = (v * te, c * (tq - te));
        if r <= 0.0 {
            return Ok(if xf.abs() < w { angular_integral(0.0, pi, params, tol)? } else { 0.0 });
        }
        let lo = ((-w - xf) / r).clamp(-1.0, 1.0);
        let hi = ((w - xf) / r).clamp(-1.0, 1.0);
        angular_integral(hi.acos(), lo.acos(), params, tol)
    };
    // split the event interval where the region boundary meets the circle
    let mut cuts = vec![0.0, tq];
    for (sx, sw) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        // v te + sx c (tq - te) = sw w
        let denom = v - sx * c;
        if denom.abs() > 0.0 {
            let te = (sw * w - sx * c * tq) / denom;
            if te > 0.0 && te < tq {
                cuts.push(te);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let failure = std::cell::RefCell::new(None);
    for seg in cuts.windows(2) {
        let out = integrate(
            |te| match inner(te) {
                Ok(val) => val,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            },
            seg[0],
            seg[1],
            tol,
        );
        total += out.integral;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    // two fronts, two circle branches (±φ), 1/2π angular measure, 1/2w region
    Ok(2.0 * v * total / (pi * 2.0 * w))
}

/// `ε̄(v)` over the whole system (`half_width = None`) or a central region.
pub fn total_energy_vs_velocity(
    velocities: &[f64],
    params: &HeatwaveParams,
    half_length: f64,
    half_width: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    velocities
        .iter()
        .map(|&v| {
            let p = HeatwaveParams { v, ..*params };
            Ok((v, region_average(&p, half_length, half_width.unwrap_or(half_length), 1e-12)?))
        })
        .collect()
}

/// Ratio of the mean of `η⁻³` over backward emission (`θ > π/2`) to that
/// over forward emission: the Doppler estimate of `ε_cold / ε_hot`.
pub fn doppler_cold_hot_ratio(beta: f64) -> Result<f64> {
    let half = std::f64::consts::FRAC_PI_2;
    let f = |th: f64| doppler_factor(th.clamp(0.0, std::f64::consts::PI), beta).map(|e| e.powi(-3)).unwrap_or(f64::NAN);
    let back = integrate(f, half, std::f64::consts::PI, 1e-12).integral;
    let fwd = integrate(f, 0.0, half, 1e-12).integral;
    Ok(back / fwd)
}
