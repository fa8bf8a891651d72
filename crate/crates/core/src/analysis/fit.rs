use ndarray::{Array1, Array2};
use ndarray_linalg::{LeastSquaresSvd, Solve, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub sigma_slope: f64,
    pub sigma_intercept: f64,
    /// Weighted sum of squared residuals.
    pub chi2: f64,
}

/// Weighted straight-line fit `y = slope·x + intercept`. With `sigma` absent
/// the parameter errors are scaled by the residual variance.
pub fn linear_fit(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return Err(Error::Fit("linear fit needs at least two matched points".into()));
    }
    let w: Vec<f64> = match sigma {
        Some(s) if s.iter().all(|&v| v > 0.0) => s.iter().map(|v| 1.0 / (v * v)).collect(),
        Some(_) => return Err(Error::Fit("uncertainties must be positive".into())),
        None => vec![1.0; n],
    };
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let det = sw * sxx - sx * sx;
    if det.abs() <= 1e-14 * sw * sxx.max(1e-300) {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let chi2: f64 = (0..n).map(|i| w[i] * (y[i] - slope * x[i] - intercept).powi(2)).sum();
    let scale = if sigma.is_none() && n > 2 { chi2 / (n - 2) as f64 } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        sigma_slope: (scale * sw / det).sqrt(),
        sigma_intercept: (scale * sxx / det).sqrt(),
        chi2,
    })
}

/// `ε0(Ly) = Q' + b'·Ly^(-p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub q: f64,
    pub b: f64,
    pub p: f64,
    /// Bootstrap standard deviations (zero for a fixed exponent's `p`).
    pub sigma_q: f64,
    pub sigma_b: f64,
    pub sigma_p: f64,
    pub residual: f64,
    /// False when the data carry no information on `p` (for example `b ≈ 0`).
    pub identifiable: bool,
}

fn model(l: f64, q: f64, b: f64, p: f64) -> f64 {
    q + b * l.powf(-p)
}

fn sum_sq(ly: &[f64], eps: &[f64], q: f64, b: f64, p: f64) -> f64 {
    ly.iter().zip(eps).map(|(&l, &e)| (e - model(l, q, b, p)).powi(2)).sum()
}

fn linear_at(ly: &[f64], eps: &[f64], p: f64) -> Result<(f64, f64)> {
    let x: Vec<f64> = ly.iter().map(|l| l.powf(-p)).collect();
    let f = linear_fit(&x, eps, None)?;
    Ok((f.intercept, f.slope))
}

/// Damped Gauss-Newton on `(Q', b', p)` with the analytic Jacobian.
fn levenberg_marquardt(ly: &[f64], eps: &[f64], start: (f64, f64, f64)) -> Result<(f64, f64, f64)> {
    let (mut q, mut b, mut p) = start;
    let mut cost = sum_sq(ly, eps, q, b, p);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = Array2::<f64>::zeros((3, 3));
        let mut jtr = Array1::<f64>::zeros(3);
        for (&l, &e) in ly.iter().zip(eps) {
            let lp = l.powf(-p);
            let grad = [1.0, lp, -b * l.ln() * lp];
            let r = e - model(l, q, b, p);
            for a in 0..3 {
                jtr[a] += grad[a] * r;
                for c in 0..3 {
                    jtj[[a, c]] += grad[a] * grad[c];
                }
            }
        }
        let mut improved = false;
        for _ in 0..40 {
            let mut damped = jtj.clone();
            for a in 0..3 {
                damped[[a, a]] += lambda * jtj[[a, a]].max(1e-300);
            }
            let Ok(step) = damped.solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let (nq, nb, np) = (q + step[0], b + step[1], p + step[2]);
            let new_cost = sum_sq(ly, eps, nq, nb, np);
            if new_cost.is_finite() && new_cost <= cost {
                let rel = (cost - new_cost) / cost.max(1e-300);
                (q, b, p, cost) = (nq, nb, np, new_cost);
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-15 && cost > 1e-30;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok((q, b, p))
}

fn bootstrap<F>(eps: &[f64], fitted: &[f64], refit: F) -> [f64; 3]
where
    F: Fn(&[f64]) -> Option<[f64; 3]>,
{
    let resid: Vec<f64> = eps.iter().zip(fitted).map(|(e, f)| e - f).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut samples = Vec::new();
    for _ in 0..200 {
        let synthetic: Vec<f64> = fitted.iter().map(|f| f + resid[rng.gen_range(0..resid.len())]).collect();
        if let Some(s) = refit(&synthetic) {
            samples.push(s);
        }
    }
    let mut out = [0.0; 3];
    if samples.len() < 2 {
        return out;
    }
    for (k, o) in out.iter_mut().enumerate() {
        let mean = samples.iter().map(|s| s[k]).sum::<f64>() / samples.len() as f64;
        *o = (samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64).sqrt();
    }
    out
}

/// Fit `ε0 = Q' + b'·Ly^(-p)` to at least four widths; uncertainties from
/// 200 residual-bootstrap resamples.
pub fn energy_density_scaling_fit(ly: &[f64], eps: &[f64]) -> Result<PowerLawFit> {
    if ly.len() < 4 || eps.len() != ly.len() {
        return Err(Error::Fit("power-law fit needs at least four widths".into()));
    }
    if ly.iter().any(|&l| l <= 0.0) {
        return Err(Error::Fit("widths must be positive".into()));
    }
    let spread = eps.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let level = eps.iter().map(|e| e.abs()).fold(0.0, f64::max).max(1e-300);
    if spread <= 1e-12 * level {
        let q = eps.iter().sum::<f64>() / eps.len() as f64;
        return Ok(PowerLawFit {
            q,
            b: 0.0,
            p: f64::NAN,
            sigma_q: 0.0,
            sigma_b: 0.0,
            sigma_p: f64::NAN,
            residual: sum_sq(ly, eps, q, 0.0, 0.0),
            identifiable: false,
        });
    }
    let fit_once = |data: &[f64]| -> Result<(f64, f64, f64)> {
        // profile over p on a grid to seed the damped solver
        let mut best = (f64::INFINITY, 1.0);
        for k in 1..=60 {
            let p = 0.1 * k as f64;
            let (q, b) = linear_at(ly, data, p)?;
            let c = sum_sq(ly, data, q, b, p);
            if c < best.0 {
                best = (c, p);
            }
        }
        let (q, b) = linear_at(ly, data, best.1)?;
        levenberg_marquardt(ly, data, (q, b, best.1))
    };
    let (q, b, p) = fit_once(eps)?;
    let fitted: Vec<f64> = ly.iter().map(|&l| model(l, q, b, p)).collect();
    let sig = bootstrap(eps, &fitted, |d| fit_once(d).ok().map(|(q, b, p)| [q, b, p]));
    Ok(PowerLawFit {
        q,
        b,
        p,
        sigma_q: sig[0],
        sigma_b: sig[1],
        sigma_p: sig[2],
        residual: sum_sq(ly, eps, q, b, p),
        identifiable: b.abs() > 1e-10 * level,
    })
}

/// Same model with the exponent held fixed (linear in `Q'` and `b'`).
pub fn energy_density_fixed_exponent(ly: &[f64], eps: &[f64], p: f64) -> Result<PowerLawFit> {
    if ly.len() < 2 || eps.len() != ly.len() {
        return Err(Error::Fit("fixed-exponent fit needs at least two widths".into()));
    }
    let (q, b) = linear_at(ly, eps, p)?;
    let fitted: Vec<f64> = ly.iter().map(|&l| model(l, q, b, p)).collect();
    let sig = bootstrap(eps, &fitted, |d| linear_at(ly, d, p).ok().map(|(q, b)| [q, b, 0.0]));
    Ok(PowerLawFit {
        q,
        b,
        p,
        sigma_q: sig[0],
        sigma_b: sig[1],
        sigma_p: 0.0,
        residual: sum_sq(ly, eps, q, b, p),
        identifiable: true,
    })
}

/// `S = a·Ly + b·ln Ly + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaLawFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub residual: f64,
    /// Residual of the nested model without the logarithm.
    pub linear_residual: f64,
    /// F statistic for adding the logarithmic term (infinite for an exact fit).
    pub f_statistic: f64,
}

pub fn entropy_area_law_fit(ly: &[f64], entropy: &[f64]) -> Result<AreaLawFit> {
    let n = ly.len();
    if n < 3 || entropy.len() != n {
        return Err(Error::Fit("area-law fit needs at least three widths".into()));
    }
    if ly.iter().any(|&l| l <= 0.0) {
        return Err(Error::Fit("widths must be positive".into()));
    }
    let design = Array2::from_shape_fn((n, 3), |(i, k)| match k {
        0 => ly[i],
        1 => ly[i].ln(),
        _ => 1.0,
    });
    let (_, sv, _) = design.svd(false, false)?;
    let cond = sv[0] / sv[2].max(1e-300);
    if cond > 1e10 {
        return Err(Error::Fit(format!("basis {{Ly, ln Ly, 1}} is collinear on these widths (condition {cond:.1e})")));
    }
    let rhs = Array1::from(entropy.to_vec());
    let sol = design.least_squares(&rhs)?.solution;
    let (a, b, c) = (sol[0], sol[1], sol[2]);
    let residual: f64 = (0..n).map(|i| (entropy[i] - a * ly[i] - b * ly[i].ln() - c).powi(2)).sum();
    let lin = linear_fit(ly, entropy, None)?;
    let f_statistic = if n > 3 {
        let dof = (n - 3) as f64;
        if residual > 0.0 {
            (lin.chi2 - residual) / (residual / dof)
        } else {
            f64::INFINITY
        }
    } else {
        f64::NAN
    };
    Ok(AreaLawFit { a, b, c, residual, linear_residual: lin.chi2, f_statistic })
}
