use std::collections::BTreeMap;

use argmin::core::{CostFunction, Executor};
use argmin::solver::brent::BrentOpt;
use argmin::solver::neldermead::NelderMead;
use serde::Serialize;

use crate::{Error, Result};

/// One rescaled branch of a collapse, sorted by `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub label: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Curve {
    pub fn new(label: f64, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut pts: Vec<(f64, f64)> = points.into_iter().collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (x, y) = pts.into_iter().unzip();
        Self { label, x, y }
    }

    fn range(&self) -> Option<(f64, f64)> {
        Some((*self.x.first()?, *self.x.last()?))
    }

    /// Piecewise-linear interpolation; `xq` must lie inside the range.
    fn at(&self, xq: f64) -> f64 {
        let k = self.x.partition_point(|&x| x < xq);
        if k == 0 {
            return self.y[0];
        }
        if k == self.x.len() {
            return self.y[k - 1];
        }
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        if x1 == x0 {
            return self.y[k];
        }
        let w = (xq - x0) / (x1 - x0);
        self.y[k - 1] * (1.0 - w) + self.y[k] * w
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CollapseResult {
    pub curves: Vec<Curve>,
    pub residual: f64,
}

/// Mean over overlapping curve pairs of the relative squared L2 distance
/// `∫(y_i - y_j)² / ∫(y_i² + y_j²)/2` on the common `x` interval.
///
/// The value does not change when every `x` or every `y` is multiplied by
/// the same constant. Errors when fewer than two curves exist or no pair
/// overlaps.
pub fn collapse_residual(curves: &[Curve]) -> Result<f64> {
    let usable: Vec<&Curve> = curves.iter().filter(|c| c.x.len() >= 2).collect();
    if usable.len() < 2 {
        return Err(Error::Fit("a collapse needs at least two curves with two points each".into()));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (i, a) in usable.iter().enumerate() {
        for b in &usable[i + 1..] {
            let ((a0, a1), (b0, b1)) = (a.range().unwrap(), b.range().unwrap());
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if hi <= lo {
                continue;
            }
            let mut grid: Vec<f64> =
                a.x.iter().chain(b.x.iter()).copied().filter(|&x| x > lo && x < hi).chain([lo, hi]).collect();
            grid.sort_by(f64::total_cmp);
            grid.dedup();
            let (mut diff, mut scale) = (0.0, 0.0);
            for w in grid.windows(2) {
                let h = w[1] - w[0];
                let (da, db) = (a.at(w[0]) - b.at(w[0]), a.at(w[1]) - b.at(w[1]));
                diff += 0.5 * h * (da * da + db * db);
                let s = |x: f64| 0.5 * (a.at(x).powi(2) + b.at(x).powi(2));
                scale += 0.5 * h * (s(w[0]) + s(w[1]));
            }
            if scale > 0.0 {
                total += diff / scale;
            }
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::Fit("rescaled curves do not overlap".into()));
    }
    Ok(total / pairs as f64)
}

fn group_by_ly<P, F: Fn(&P) -> (usize, f64, f64)>(data: &[P], f: F) -> Result<BTreeMap<usize, Vec<(f64, f64)>>> {
    let mut groups: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for p in data {
        let (ly, a, b) = f(p);
        groups.entry(ly).or_default().push((a, b));
    }
    if groups.len() < 2 {
        return Err(Error::Fit("a collapse needs at least two distinct widths".into()));
    }
    Ok(groups)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapPoint {
    pub ly: usize,
    pub g: f64,
    pub gap: f64,
}

/// Rescale to `(g - gc)·Ly^(1/ν)` against `gap·Ly^z` and measure the collapse.
pub fn gap_collapse(data: &[GapPoint], gc: f64, nu: f64, z: f64) -> Result<CollapseResult> {
    if data.iter().any(|p| p.gap <= 0.0 || !p.gap.is_finite()) {
        return Err(Error::Fit("gaps must be positive".into()));
    }
    if nu <= 0.0 {
        return Err(Error::Fit("ν must be positive".into()));
    }
    let groups = group_by_ly(data, |p| (p.ly, p.g, p.gap))?;
    let curves: Vec<Curve> = groups
        .into_iter()
        .map(|(ly, pts)| {
            let l = ly as f64;
            Curve::new(l, pts.into_iter().map(|(g, gap)| ((g - gc) * l.powf(1.0 / nu), gap * l.powf(z))))
        })
        .collect();
    let residual = collapse_residual(&curves)?;
    Ok(CollapseResult { curves, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapCollapseFit {
    pub gc: f64,
    pub nu: f64,
    pub residual: f64,
}

struct Objective<F>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Objective<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(p))
    }
}

struct Scalar1<F>(F);

impl<F: Fn(f64) -> f64> CostFunction for Scalar1<F> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, p: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(*p))
    }
}

fn fit_err(e: argmin::core::Error) -> Error {
    Error::Fit(e.to_string())
}

/// Minimize the gap-collapse residual over `(gc, ν)` with Nelder-Mead,
/// starting from `start`.
pub fn fit_gap_collapse(data: &[GapPoint], z: f64, start: (f64, f64)) -> Result<GapCollapseFit> {
    gap_collapse(data, start.0, start.1, z)?;
    let cost = |p: &[f64]| gap_collapse(data, p[0], p[1], z).map(|r| r.residual).unwrap_or(f64::INFINITY);
    let (g0, n0) = start;
    let simplex = vec![vec![g0, n0], vec![g0 * 1.02, n0], vec![g0, n0 * 1.05]];
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-14).map_err(fit_err)?;
    let res = Executor::new(Objective(cost), solver)
        .configure(|s| s.max_iters(4000))
        .run()
        .map_err(fit_err)?;
    let best = res.state.best_param.clone().ok_or_else(|| Error::Fit("optimizer returned nothing".into()))?;
    Ok(GapCollapseFit { gc: best[0], nu: best[1], residual: res.state.best_cost })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationPoint {
    pub ly: usize,
    pub r: f64,
    pub cx: f64,
}

/// Rescale to `r / Ly` against `Ly^(2Δ)·Cx` and measure the collapse.
pub fn correlation_collapse(data: &[CorrelationPoint], two_delta: f64) -> Result<CollapseResult> {
    let groups = group_by_ly(data, |p| (p.ly, p.r, p.cx))?;
    let curves: Vec<Curve> = groups
        .into_iter()
        .map(|(ly, pts)| {
            let l = ly as f64;
            Curve::new(l, pts.into_iter().map(|(r, c)| (r / l, c * l.powf(two_delta))))
        })
        .collect();
    let residual = collapse_residual(&curves)?;
    Ok(CollapseResult { curves, residual })
}

/// Exponent `2Δ` in `[lo, hi]` giving the best correlation collapse.
pub fn scan_two_delta(data: &[CorrelationPoint], lo: f64, hi: f64) -> Result<(f64, f64)> {
    if hi <= lo {
        return Err(Error::Fit("empty exponent interval".into()));
    }
    let cost = |d: f64| correlation_collapse(data, d).map(|r| r.residual).unwrap_or(f64::INFINITY);
    // coarse grid first: the residual need not be unimodal over a wide range
    let n = 64;
    let (mut best, mut best_cost) = (lo, f64::INFINITY);
    for k in 0..=n {
        let d = lo + (hi - lo) * k as f64 / n as f64;
        let c = cost(d);
        if c < best_cost {
            best = d;
            best_cost = c;
        }
    }
    let step = (hi - lo) / n as f64;
    let (a, b) = ((best - step).max(lo), (best + step).min(hi));
    let solver = BrentOpt::new(a, b).set_tolerance(1e-12, 1e-14);
    let res = Executor::new(Scalar1(cost), solver).configure(|s| s.max_iters(200)).run().map_err(fit_err)?;
    match res.state.best_param {
        Some(d) if res.state.best_cost <= best_cost => Ok((d, res.state.best_cost)),
        _ => Ok((best, best_cost)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyVelocityPoint {
    pub ly: usize,
    pub v: f64,
    pub eps: f64,
}

/// Rescale post-quench energy densities to `v / c(Ly)` against
/// `Ly^p·ε̄` (critical scaling uses `p = 2 - ν`).
pub fn energy_velocity_collapse(
    data: &[EnergyVelocityPoint],
    light_speed: impl Fn(usize) -> f64,
    exponent: f64,
) -> Result<CollapseResult> {
    let groups = group_by_ly(data, |p| (p.ly, p.v, p.eps))?;
    let curves: Vec<Curve> = groups
        .into_iter()
        .map(|(ly, pts)| {
            let (l, c) = (ly as f64, light_speed(ly));
            Curve::new(l, pts.into_iter().map(|(v, e)| (v / c, e * l.powf(exponent))))
        })
        .collect();
    let residual = collapse_residual(&curves)?;
    Ok(CollapseResult { curves, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::FreeFermionChain;

    fn synthetic_gaps() -> Vec<GapPoint> {
        let shape = |u: f64| (1.0 + u * u).sqrt() + 0.3 * u;
        let mut data = Vec::new();
        for ly in [3usize, 4, 5, 6, 8] {
            let l = ly as f64;
            for k in 0..=240 {
                let g = 2.7 + 0.7 * k as f64 / 240.0;
                let u = (g - 3.04438) * l.powf(1.0 / 0.63);
                data.push(GapPoint { ly, g, gap: shape(u) / l });
            }
        }
        data
    }

    #[test]
    fn identical_curves_have_zero_residual() {
        let a = Curve::new(1.0, (0..10).map(|i| (i as f64, (i as f64).sin())));
        let b = Curve::new(2.0, (0..10).map(|i| (i as f64, (i as f64).sin())));
        assert!(collapse_residual(&[a.clone(), b]).unwrap() < 1e-30);
        assert!(collapse_residual(&[a]).is_err());
    }

    #[test]
    fn residual_ignores_global_rescaling() {
        let a = Curve::new(1.0, (0..10).map(|i| (i as f64, 1.0 + i as f64)));
        let b = Curve::new(2.0, (0..10).map(|i| (0.5 + i as f64, 1.2 + (i as f64).powf(1.1))));
        let r = collapse_residual(&[a.clone(), b.clone()]).unwrap();
        let scale = |c: &Curve| Curve::new(c.label, c.x.iter().zip(&c.y).map(|(&x, &y)| (3.0 * x, 7.0 * y)));
        let r2 = collapse_residual(&[scale(&a), scale(&b)]).unwrap();
        assert!(r > 0.0 && ((r - r2) / r).abs() < 1e-12);
    }

    #[test]
    fn gap_fit_recovers_planted_exponents() {
        let data = synthetic_gaps();
        let fit = fit_gap_collapse(&data, 1.0, (3.0, 0.7)).unwrap();
        assert!((fit.gc - 3.04438).abs() / 3.04438 < 0.005, "{fit:?}");
        assert!((fit.nu - 0.63).abs() / 0.63 < 0.03, "{fit:?}");
    }

    #[test]
    fn single_width_rejected() {
        let data: Vec<GapPoint> = synthetic_gaps().into_iter().filter(|p| p.ly == 4).collect();
        assert!(gap_collapse(&data, 3.0, 0.63, 1.0).is_err());
    }

    #[test]
    fn free_fermion_gaps_collapse_at_ising_point() {
        // deep in the ordered side open-chain edge modes dominate the gap
        let mut data = Vec::new();
        for l in (8..=32).step_by(4) {
            for k in 0..=120 {
                let g = 1.0 + (-1.0 + 4.0 * k as f64 / 120.0) / l as f64;
                data.push(GapPoint { ly: l, g, gap: FreeFermionChain::new(l, g, 1.0).unwrap().gap() });
            }
        }
        let at = |gc: f64, nu: f64| gap_collapse(&data, gc, nu, 1.0).unwrap().residual;
        let best = at(1.0, 1.0);
        for (gc, nu) in [(1.05, 1.0), (0.95, 1.0), (1.0, 1.05), (1.0, 0.95)] {
            assert!(best < at(gc, nu), "gc={gc} nu={nu}");
        }
    }

    #[test]
    fn correlation_collapse_at_planted_exponent() {
        let mut data = Vec::new();
        for ly in [2usize, 3, 4, 6] {
            let l = ly as f64;
            for k in 0..=50 {
                let u = 0.1 * k as f64;
                data.push(CorrelationPoint { ly, r: u * l, cx: l.powf(-1.0363) * (-u).exp() });
            }
        }
        let exact = correlation_collapse(&data, 1.0363).unwrap().residual;
        assert!(exact < 1e-8);
        assert!(correlation_collapse(&data, 1.2).unwrap().residual > 1e3 * exact.max(1e-12));
        let (best, _) = scan_two_delta(&data, 0.0, 2.0).unwrap();
        assert!((best - 1.0363).abs() < 1e-4, "{best}");
    }

    #[test]
    fn flat_correlations_prefer_zero_exponent() {
        let data: Vec<CorrelationPoint> = [2usize, 3, 4]
            .iter()
            .flat_map(|&ly| (0..10).map(move |r| CorrelationPoint { ly, r: r as f64, cx: 0.4 }))
            .collect();
        let (best, res) = scan_two_delta(&data, 0.0, 2.0).unwrap();
        assert!(best.abs() < 1e-6 && res < 1e-20, "{best} {res}");
    }
}
