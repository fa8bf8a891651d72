//! Time-dependent variational principle for MPS.
//!
//! One second-order step is a left-to-right sweep over half the step
//! followed by the mirrored right-to-left sweep. Two-site mode evolves bond
//! tensors forward and single sites backward; one-site mode evolves sites
//! forward and bond matrices backward. The Hamiltonian of a step is frozen
//! at the step midpoint. Fourth order composes three second-order steps
//! (Suzuki triple jump).

use ndarray::{Array1, Array2, Array3, Array4};
use serde::Serialize;

use crate::krylov::{expm_apply, ExpmOptions};
use crate::mps::env::{apply_h0, apply_h1, apply_h2, left_env_update, right_env_update, trivial_env};
use crate::mps::{lq_thin, qr_thin, Mpo, Mps};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TdvpMode {
    TwoSite,
    OneSite,
}

#[derive(Debug, Clone, Serialize)]
pub struct TdvpSettings {
    pub dt: f64,
    /// 2 or 4.
    pub order: u8,
    pub chi_max: usize,
    pub cutoff: f64,
    pub krylov_dim: usize,
    pub expm_tol: f64,
    pub mode: TdvpMode,
    /// Stop with [`Error::ChiOverflow`] when a step discards more weight
    /// than this while the bond dimension is saturated.
    pub overflow_weight: Option<f64>,
}

impl Default for TdvpSettings {
    fn default() -> Self {
        Self {
            dt: 0.05,
            order: 4,
            chi_max: 512,
            cutoff: 1e-10,
            krylov_dim: 40,
            expm_tol: 1e-12,
            mode: TdvpMode::TwoSite,
            overflow_weight: Some(1e-5),
        }
    }
}

impl TdvpSettings {
    /// Settings for the exact regime: no truncation at all.
    pub fn exact(dt: f64, order: u8) -> Self {
        Self { dt, order, chi_max: usize::MAX / 4, cutoff: 0.0, overflow_weight: None, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if self.order != 2 && self.order != 4 {
            return Err(Error::InvalidInput(format!("order must be 2 or 4, got {}", self.order)));
        }
        if self.chi_max == 0 || self.krylov_dim == 0 || self.cutoff < 0.0 || !(self.expm_tol > 0.0) {
            return Err(Error::InvalidInput("invalid TDVP truncation or Krylov settings".into()));
        }
        Ok(())
    }
}

/// Weights `(w1, w2)` of the fourth-order triple jump.
pub fn triple_jump_weights() -> (f64, f64) {
    let w1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
    (w1, 1.0 - 2.0 * w1)
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StepInfo {
    /// Largest discarded weight of any split during the step.
    pub max_discarded: f64,
    pub max_krylov: usize,
}

impl StepInfo {
    fn merge(&mut self, other: StepInfo) {
        self.max_discarded = self.max_discarded.max(other.max_discarded);
        self.max_krylov = self.max_krylov.max(other.max_krylov);
    }
}

fn flat<D: ndarray::Dimension>(a: &ndarray::Array<C64, D>) -> Array1<C64> {
    Array1::from_iter(a.iter().copied())
}

/// `exp(z H) v`, retrying once with two half steps if the Krylov space is
/// too small.
fn local_expm<F>(apply: F, v: &Array1<C64>, z: C64, opts: &ExpmOptions, info: &mut StepInfo) -> Result<Array1<C64>>
where
    F: Fn(&Array1<C64>) -> Array1<C64>,
{
    match expm_apply(&apply, v, z, opts) {
        Ok((out, m)) => {
            info.max_krylov = info.max_krylov.max(m);
            Ok(out)
        }
        Err(Error::NotConverged(_)) => {
            let (half, m1) = expm_apply(&apply, v, z * 0.5, opts)?;
            let (out, m2) = expm_apply(&apply, &half, z * 0.5, opts)?;
            info.max_krylov = info.max_krylov.max(m1.max(m2));
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

struct Sweeper<'a> {
    mpo: &'a Mpo<C64>,
    left: Vec<Array3<C64>>,
    right: Vec<Array3<C64>>,
    opts: ExpmOptions,
    chi: usize,
    cutoff: f64,
}

impl<'a> Sweeper<'a> {
    fn new(state: &mut Mps<C64>, mpo: &'a Mpo<C64>, settings: &TdvpSettings) -> Result<Self> {
        let n = state.len();
        if mpo.len() != n {
            return Err(Error::DimensionMismatch(format!("MPO has {} sites, state {n}", mpo.len())));
        }
        state.move_center(0)?;
        let mut right = vec![trivial_env(); n];
        for k in (1..n).rev() {
            right[k - 1] = right_env_update(&right[k], state.tensor(k), mpo.tensor(k));
        }
        Ok(Self {
            mpo,
            left: vec![trivial_env(); n],
            right,
            opts: ExpmOptions { max_krylov: settings.krylov_dim, tol: settings.expm_tol },
            chi: settings.chi_max,
            cutoff: settings.cutoff,
        })
    }

    fn evolve_site(&self, a: &Array3<C64>, k: usize, z: C64, info: &mut StepInfo) -> Result<Array3<C64>> {
        let shape = a.dim();
        let (l, w, r) = (&self.left[k], self.mpo.tensor(k), &self.right[k]);
        let apply = |x: &Array1<C64>| flat(&apply_h1(l, w, r, &Array3::from_shape_vec(shape, x.to_vec()).unwrap()));
        let out = local_expm(apply, &flat(a), z, &self.opts, info)?;
        Ok(Array3::from_shape_vec(shape, out.to_vec()).unwrap())
    }

    fn evolve_pair(&self, theta: &Array4<C64>, k: usize, z: C64, info: &mut StepInfo) -> Result<Array4<C64>> {
        let shape = theta.dim();
        let (l, r) = (&self.left[k], &self.right[k + 1]);
        let (w1, w2) = (self.mpo.tensor(k), self.mpo.tensor(k + 1));
        let apply = |x: &Array1<C64>| flat(&apply_h2(l, w1, w2, r, &Array4::from_shape_vec(shape, x.to_vec()).unwrap()));
        let out = local_expm(apply, &flat(theta), z, &self.opts, info)?;
        Ok(Array4::from_shape_vec(shape, out.to_vec()).unwrap())
    }

    /// Bond matrix between sites `k` and `k + 1`.
    fn evolve_bond(&self, c: &Array2<C64>, k: usize, z: C64, info: &mut StepInfo) -> Result<Array2<C64>> {
        let shape = c.dim();
        let (l, r) = (&self.left[k + 1], &self.right[k]);
        let apply = |x: &Array1<C64>| flat(&apply_h0(l, r, &Array2::from_shape_vec(shape, x.to_vec()).unwrap()));
        let out = local_expm(apply, &flat(c), z, &self.opts, info)?;
        Ok(Array2::from_shape_vec(shape, out.to_vec()).unwrap())
    }

    fn two_site_sweeps(&mut self, state: &mut Mps<C64>, half: f64) -> Result<StepInfo> {
        let n = state.len();
        let mut info = StepInfo::default();
        let fwd = C64::new(0.0, -half);
        let bwd = C64::new(0.0, half);
        if n == 1 {
            let a = self.evolve_site(state.tensor(0), 0, fwd * 2.0, &mut info)?;
            state.set_tensor(0, a)?;
            return Ok(info);
        }
        for k in 0..n - 1 {
            let theta = self.evolve_pair(&state.two_site(k), k, fwd, &mut info)?;
            let split = state.set_two_site(k, &theta, self.chi, self.cutoff, true)?;
            info.max_discarded = info.max_discarded.max(split.discarded_weight);
            self.left[k + 1] = left_env_update(&self.left[k], state.tensor(k), self.mpo.tensor(k));
            if k + 1 < n - 1 {
                let a = self.evolve_site(state.tensor(k + 1), k + 1, bwd, &mut info)?;
                state.set_tensor(k + 1, a)?;
            }
        }
        for k in (0..n - 1).rev() {
            let theta = self.evolve_pair(&state.two_site(k), k, fwd, &mut info)?;
            let split = state.set_two_site(k, &theta, self.chi, self.cutoff, false)?;
            info.max_discarded = info.max_discarded.max(split.discarded_weight);
            self.right[k] = right_env_update(&self.right[k + 1], state.tensor(k + 1), self.mpo.tensor(k + 1));
            if k > 0 {
                let a = self.evolve_site(state.tensor(k), k, bwd, &mut info)?;
                state.set_tensor(k, a)?;
            }
        }
        Ok(info)
    }

    fn one_site_sweeps(&mut self, state: &mut Mps<C64>, half: f64) -> Result<StepInfo> {
        let n = state.len();
        let mut info = StepInfo::default();
        let fwd = C64::new(0.0, -half);
        let bwd = C64::new(0.0, half);
        for k in 0..n {
            let a = self.evolve_site(state.tensor(k), k, fwd, &mut info)?;
            if k + 1 == n {
                state.set_tensor(k, a)?;
                break;
            }
            let (dl, d, dr) = a.dim();
            let (q, r) = qr_thin(&a.to_shape((dl * d, dr)).unwrap().view())?;
            let chi = q.dim().1;
            let tensors = state.tensors_mut();
            tensors[k] = q.as_standard_layout().into_owned().into_shape_with_order((dl, d, chi)).unwrap();
            self.left[k + 1] = left_env_update(&self.left[k], &tensors[k], self.mpo.tensor(k));
            let c = self.evolve_bond(&r, k, bwd, &mut info)?;
            let next = &tensors[k + 1];
            let (_, d2, dr2) = next.dim();
            let merged = c.dot(&next.to_shape((dr, d2 * dr2)).unwrap());
            tensors[k + 1] = merged.into_shape_with_order((chi, d2, dr2)).unwrap();
            state.assume_center(k + 1);
        }
        for k in (0..n).rev() {
            let a = self.evolve_site(state.tensor(k), k, fwd, &mut info)?;
            if k == 0 {
                state.set_tensor(0, a)?;
                break;
            }
            let (dl, d, dr) = a.dim();
            let (l, q) = lq_thin(&a.to_shape((dl, d * dr)).unwrap().view())?;
            let chi = q.dim().0;
            let tensors = state.tensors_mut();
            tensors[k] = q.as_standard_layout().into_owned().into_shape_with_order((chi, d, dr)).unwrap();
            self.right[k - 1] = right_env_update(&self.right[k], &tensors[k], self.mpo.tensor(k));
            let c = self.evolve_bond(&l, k - 1, bwd, &mut info)?;
            let prev = &tensors[k - 1];
            let (dl0, d0, _) = prev.dim();
            let merged = prev.to_shape((dl0 * d0, dl)).unwrap().dot(&c);
            tensors[k - 1] = merged.into_shape_with_order((dl0, d0, chi)).unwrap();
            state.assume_center(k - 1);
        }
        Ok(info)
    }
}

/// One second-order step of length `dt` from time `t`.
pub fn step2<F>(state: &mut Mps<C64>, mpo_at: &F, t: f64, dt: f64, settings: &TdvpSettings) -> Result<StepInfo>
where
    F: Fn(f64) -> Result<Mpo<C64>>,
{
    let mpo = mpo_at(t + 0.5 * dt)?;
    let mut sweeper = Sweeper::new(state, &mpo, settings)?;
    let info = match settings.mode {
        TdvpMode::TwoSite => sweeper.two_site_sweeps(state, 0.5 * dt)?,
        TdvpMode::OneSite => sweeper.one_site_sweeps(state, 0.5 * dt)?,
    };
    state.assume_center(0);
    Ok(info)
}

/// One fourth-order step: second-order steps of `w1 dt`, `w2 dt`, `w1 dt`.
pub fn step4<F>(state: &mut Mps<C64>, mpo_at: &F, t: f64, dt: f64, settings: &TdvpSettings) -> Result<StepInfo>
where
    F: Fn(f64) -> Result<Mpo<C64>>,
{
    let (w1, w2) = triple_jump_weights();
    let mut info = step2(state, mpo_at, t, w1 * dt, settings)?;
    info.merge(step2(state, mpo_at, t + w1 * dt, w2 * dt, settings)?);
    info.merge(step2(state, mpo_at, t + (w1 + w2) * dt, w1 * dt, settings)?);
    Ok(info)
}

/// A step at the configured order.
pub fn step<F>(state: &mut Mps<C64>, mpo_at: &F, t: f64, dt: f64, settings: &TdvpSettings) -> Result<StepInfo>
where
    F: Fn(f64) -> Result<Mpo<C64>>,
{
    match settings.order {
        2 => step2(state, mpo_at, t, dt, settings),
        4 => step4(state, mpo_at, t, dt, settings),
        o => Err(Error::InvalidInput(format!("order must be 2 or 4, got {o}"))),
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EvolveSummary {
    pub steps: usize,
    pub final_time: f64,
    /// Largest per-step discarded weight.
    pub max_discarded: f64,
    /// Sum of per-step discarded weights.
    pub total_discarded: f64,
    pub max_chi: usize,
}

/// Evolve from `t_start` through the sorted measurement times `schedule`,
/// calling `observer` at `t_start` (if it is in the schedule) and at every
/// schedule time. Steps are shortened to land on measurement times.
///
/// On [`Error::ChiOverflow`] the state is left at the last completed step,
/// after all measurements up to that time, so the caller can checkpoint it.
pub fn evolve<F, O>(
    state: &mut Mps<C64>,
    mpo_at: &F,
    t_start: f64,
    schedule: &[f64],
    settings: &TdvpSettings,
    mut observer: O,
) -> Result<EvolveSummary>
where
    F: Fn(f64) -> Result<Mpo<C64>>,
    O: FnMut(f64, &Mps<C64>) -> Result<()>,
{
    settings.validate()?;
    if schedule.windows(2).any(|w| w[1] < w[0]) || schedule.first().is_some_and(|&t| t < t_start) {
        return Err(Error::InvalidInput("measurement schedule must be sorted and start at or after t_start".into()));
    }
    let eps = 1e-12 * settings.dt.max(1.0);
    let mut summary = EvolveSummary { final_time: t_start, max_chi: state.max_bond_dim(), ..Default::default() };
    let mut t = t_start;
    for &target in schedule {
        while target - t > eps {
            let h = settings.dt.min(target - t);
            let info = step(state, mpo_at, t, h, settings)?;
            t = if target - (t + h) <= eps { target } else { t + h };
            summary.steps += 1;
            summary.final_time = t;
            summary.max_discarded = summary.max_discarded.max(info.max_discarded);
            summary.total_discarded += info.max_discarded;
            summary.max_chi = summary.max_chi.max(state.max_bond_dim());
            if let Some(limit) = settings.overflow_weight {
                if info.max_discarded > limit && state.max_bond_dim() >= settings.chi_max {
                    return Err(Error::ChiOverflow { t, discarded: info.max_discarded, chi: settings.chi_max });
                }
            }
        }
        observer(target, state)?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{hamiltonian_mpo, LatticeGeometry};
    use crate::mps::MeasureCache;
    use crate::ops::Pauli;

    #[test]
    fn triple_jump_conditions() {
        let (w1, w2) = triple_jump_weights();
        assert!((2.0 * w1 + w2 - 1.0).abs() < 1e-15);
        assert!((2.0 * w1.powi(3) + w2.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn larmor_precession() {
        // H = -Σ σᶻ on two decoupled spins prepared along +x
        let geom = LatticeGeometry::chain(2).unwrap();
        let mpo = hamiltonian_mpo::<C64>(&geom, &[1.0, 1.0], 0.0).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let mut psi = Mps::<C64>::product(&[[C64::new(s, 0.0), C64::new(s, 0.0)]; 2]).unwrap();
        let settings = TdvpSettings { dt: 0.05, order: 4, ..TdvpSettings::exact(0.05, 4) };
        let mpo_at = |_t: f64| Ok(mpo.clone());
        let mut values = Vec::new();
        evolve(&mut psi, &mpo_at, 0.0, &[0.0, 0.5, 1.0], &settings, |t, st| {
            let c = MeasureCache::new(st)?;
            let x = c.product_expectation(&[(0, Pauli::X.matrix().mapv(C64::from))])?.re;
            values.push((t, x));
            Ok(())
        })
        .unwrap();
        for (t, x) in values {
            assert!((x - (2.0 * t).cos()).abs() < 1e-10, "t={t} x={x}");
        }
    }
}
