//! Two-site DMRG.
//!
//! Ground states, the first excited state (through a penalty projector on
//! the ground state), instantaneous ground energies along a quench, and the
//! spectral bandwidth. Early sweeps enrich the kept basis with small random
//! directions so that the bond dimension can grow from a product start; the
//! enrichment never changes the state itself, only which basis is kept.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::{Array1, Array2, Array3, Array4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::krylov::{lowest_eigenpair, LanczosOptions};
use crate::lattice::{fields_at, hamiltonian_mpo, local_energy_operators, LatticeGeometry, ModelParams};
use crate::mps::env::{apply_h2, left_env_update, left_overlap_update, right_env_update, right_overlap_update, trivial_env};
use crate::mps::{truncated_svd, MeasureCache, Mpo, Mps};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct DmrgSettings {
    /// Maximal bond dimension per sweep; the last entry repeats.
    pub chi_schedule: Vec<usize>,
    pub cutoff: f64,
    pub max_sweeps: usize,
    pub min_sweeps: usize,
    /// Converged when the energy changes by less than this between sweeps.
    pub energy_tol: f64,
    /// Local eigensolver residual target in the final sweeps.
    pub lanczos_tol: f64,
    pub lanczos_krylov: usize,
    /// Basis-enrichment amplitude per sweep; missing entries are zero.
    pub noise_schedule: Vec<f64>,
    pub seed: u64,
    /// Penalty weight for excited states; `None` picks `4 |E0| + 1`.
    pub penalty_weight: Option<f64>,
}

impl Default for DmrgSettings {
    fn default() -> Self {
        Self {
            chi_schedule: vec![16, 32, 64, 128],
            cutoff: 1e-10,
            max_sweeps: 30,
            min_sweeps: 4,
            energy_tol: 1e-10,
            lanczos_tol: 1e-10,
            lanczos_krylov: 24,
            noise_schedule: vec![1e-3, 1e-4, 1e-5, 1e-6],
            seed: 1,
            penalty_weight: None,
        }
    }
}

impl DmrgSettings {
    pub fn with_chi(chi: usize) -> Self {
        Self { chi_schedule: vec![chi.min(16), chi.min(32), chi], ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chi_schedule.is_empty() || self.chi_schedule.contains(&0) {
            return Err(Error::InvalidInput("chi schedule must be non-empty and positive".into()));
        }
        if !(self.energy_tol > 0.0) || !(self.lanczos_tol > 0.0) || self.cutoff < 0.0 {
            return Err(Error::InvalidInput("DMRG tolerances must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidInput("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }

    fn chi_at(&self, sweep: usize) -> usize {
        self.chi_schedule[sweep.min(self.chi_schedule.len() - 1)]
    }

    fn noise_at(&self, sweep: usize) -> f64 {
        self.noise_schedule.get(sweep).copied().unwrap_or(0.0)
    }

    fn final_chi(&self) -> usize {
        *self.chi_schedule.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRecord {
    pub sweep: usize,
    pub energy: f64,
    pub max_trunc_err: f64,
    pub max_chi: usize,
}

#[derive(Debug, Clone)]
pub struct DmrgResult {
    pub state: Mps<f64>,
    pub energy: f64,
    pub sweeps: Vec<SweepRecord>,
    /// `false` when `max_sweeps` ran out before the energy settled.
    pub converged: bool,
}

/// Writes the per-sweep log as CSV (`sweep,E,maxTruncErr,maxChi`).
pub fn write_sweep_log<W: Write>(out: W, sweeps: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sweep", "E", "maxTruncErr", "maxChi"])?;
    for r in sweeps {
        w.write_record([
            r.sweep.to_string(),
            format!("{:.16e}", r.energy),
            format!("{:.16e}", r.max_trunc_err),
            r.max_chi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A state `|φ⟩` penalized with weight `w|φ⟩⟨φ|`, plus its overlap
/// environments with the running state.
struct Penalty<'a> {
    state: &'a Mps<f64>,
    weight: f64,
    left: Vec<Array2<f64>>,
    right: Vec<Array2<f64>>,
}

impl<'a> Penalty<'a> {
    fn new(state: &'a Mps<f64>, weight: f64, n: usize) -> Self {
        let one = Array2::from_elem((1, 1), 1.0);
        Self { state, weight, left: vec![one.clone(); n], right: vec![one; n] }
    }

    /// Projection of `φ` onto the two-site block `(k, k+1)`.
    fn block(&self, k: usize) -> Array4<f64> {
        let theta = self.state.two_site(k);
        let (dl, d1, d2, dr) = theta.dim();
        let l = &self.left[k];
        let r = &self.right[k + 1];
        let m = theta.into_shape_with_order((dl, d1 * d2 * dr)).unwrap();
        let t = l.dot(&m);
        let a = l.dim().0;
        let t = t.into_shape_with_order((a * d1 * d2, dr)).unwrap();
        let out = t.dot(&r.t());
        let b = r.dim().0;
        out.into_shape_with_order((a, d1, d2, b)).unwrap()
    }
}

struct Engine<'a> {
    mpo: &'a Mpo<f64>,
    state: Mps<f64>,
    left: Vec<Array3<f64>>,
    right: Vec<Array3<f64>>,
    penalties: Vec<Penalty<'a>>,
    rng: ChaCha8Rng,
}

impl<'a> Engine<'a> {
    fn new(mpo: &'a Mpo<f64>, mut state: Mps<f64>, penalties: Vec<Penalty<'a>>, seed: u64) -> Result<Self> {
        let n = state.len();
        if mpo.len() != n {
            return Err(Error::DimensionMismatch(format!("MPO has {} sites, state {n}", mpo.len())));
        }
        if n < 2 {
            return Err(Error::InvalidInput("DMRG needs at least two sites".into()));
        }
        state.canonicalize(0)?;
        state.normalize()?;
        let mut engine = Self {
            mpo,
            state,
            left: vec![trivial_env(); n],
            right: vec![trivial_env(); n],
            penalties,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        for k in (1..n).rev() {
            engine.update_right(k);
        }
        Ok(engine)
    }

    /// Recompute `right[k-1]` from `right[k]` and site `k`.
    fn update_right(&mut self, k: usize) {
        let a = self.state.tensor(k);
        self.right[k - 1] = right_env_update(&self.right[k], a, self.mpo.tensor(k));
        for p in &mut self.penalties {
            p.right[k - 1] = right_overlap_update(&p.right[k], a, p.state.tensor(k));
        }
    }

    fn update_left(&mut self, k: usize) {
        let a = self.state.tensor(k);
        self.left[k + 1] = left_env_update(&self.left[k], a, self.mpo.tensor(k));
        for p in &mut self.penalties {
            p.left[k + 1] = left_overlap_update(&p.left[k], a, p.state.tensor(k));
        }
    }

    fn optimize(&mut self, k: usize, opts: &LanczosOptions) -> Result<(f64, Array4<f64>)> {
        let theta = self.state.two_site(k);
        let shape = theta.dim();
        let (l, r) = (&self.left[k], &self.right[k + 1]);
        let (w1, w2) = (self.mpo.tensor(k), self.mpo.tensor(k + 1));
        let blocks: Vec<(f64, Array1<f64>)> = self
            .penalties
            .iter()
            .map(|p| (p.weight, Array1::from_iter(p.block(k).iter().copied())))
            .collect();
        let apply = |x: &Array1<f64>| -> Array1<f64> {
            let t = Array4::from_shape_vec(shape, x.to_vec()).unwrap();
            let mut y = Array1::from_iter(apply_h2(l, w1, w2, r, &t).iter().copied());
            for (w, b) in &blocks {
                let c = b.dot(x) * w;
                y.scaled_add(c, b);
            }
            y
        };
        let start = Array1::from_iter(theta.iter().copied());
        let ep = lowest_eigenpair(apply, &start, &[], opts)?;
        Ok((ep.value, Array4::from_shape_vec(shape, ep.vector.to_vec()).unwrap()))
    }

    /// Split with optional basis enrichment; returns the discarded weight.
    fn split(&mut self, k: usize, theta: &Array4<f64>, chi: usize, cutoff: f64, noise: f64, right: bool) -> Result<f64> {
        if noise == 0.0 {
            return Ok(self.state.set_two_site(k, theta, chi, cutoff, right)?.discarded_weight);
        }
        let (dl, d1, d2, dr) = theta.dim();
        let m = theta.to_shape((dl * d1, d2 * dr)).unwrap().to_owned();
        let total: f64 = m.iter().map(|x| x * x).sum();
        let (rows, cols) = m.dim();
        let extra = 4;
        let scale = noise * total.sqrt();
        let tensors = self.state.tensors_mut();
        if right {
            let mut aug = Array2::<f64>::zeros((rows, cols + extra));
            aug.slice_mut(ndarray::s![.., ..cols]).assign(&m);
            for v in aug.slice_mut(ndarray::s![.., cols..]).iter_mut() {
                *v = scale * self.rng.gen_range(-1.0..1.0);
            }
            let svd = truncated_svd(&aug.view(), chi, cutoff)?;
            let u = svd.u;
            let rest = u.t().dot(&m);
            let kept: f64 = rest.iter().map(|x| x * x).sum();
            let c = u.dim().1;
            tensors[k] = u.into_shape_with_order((dl, d1, c)).unwrap();
            tensors[k + 1] = rest.into_shape_with_order((c, d2, dr)).unwrap();
            self.state.assume_center(k + 1);
            let w = (1.0 - kept / total).max(0.0);
            self.state.add_truncation_error(w);
            Ok(w)
        } else {
            let mut aug = Array2::<f64>::zeros((rows + extra, cols));
            aug.slice_mut(ndarray::s![..rows, ..]).assign(&m);
            for v in aug.slice_mut(ndarray::s![rows.., ..]).iter_mut() {
                *v = scale * self.rng.gen_range(-1.0..1.0);
            }
            let svd = truncated_svd(&aug.view(), chi, cutoff)?;
            let vt = svd.vt.as_standard_layout().into_owned();
            let rest = m.dot(&vt.t());
            let kept: f64 = rest.iter().map(|x| x * x).sum();
            let c = vt.dim().0;
            tensors[k] = rest.into_shape_with_order((dl, d1, c)).unwrap();
            tensors[k + 1] = vt.into_shape_with_order((c, d2, dr)).unwrap();
            self.state.assume_center(k);
            let w = (1.0 - kept / total).max(0.0);
            self.state.add_truncation_error(w);
            Ok(w)
        }
    }

    fn sweep(&mut self, chi: usize, cutoff: f64, noise: f64, opts: &LanczosOptions) -> Result<(f64, f64)> {
        let n = self.state.len();
        let mut energy = f64::INFINITY;
        let mut max_trunc = 0.0f64;
        for k in 0..n - 1 {
            let (e, theta) = self.optimize(k, opts)?;
            energy = e;
            max_trunc = max_trunc.max(self.split(k, &theta, chi, cutoff, noise, true)?);
            self.update_left(k);
        }
        for k in (0..n - 1).rev() {
            let (e, theta) = self.optimize(k, opts)?;
            energy = e;
            max_trunc = max_trunc.max(self.split(k, &theta, chi, cutoff, noise, false)?);
            self.update_right(k + 1);
        }
        self.state.normalize()?;
        Ok((energy, max_trunc))
    }
}

fn initial_state(n: usize, settings: &DmrgSettings) -> Result<Mps<f64>> {
    Mps::random(n, settings.chi_at(0).min(4), settings.seed)
}

fn run(mpo: &Mpo<f64>, settings: &DmrgSettings, initial: Option<&Mps<f64>>, penalties: Vec<Penalty<'_>>) -> Result<DmrgResult> {
    settings.validate()?;
    let start = match initial {
        Some(s) => s.clone(),
        None => initial_state(mpo.len(), settings)?,
    };
    let mut engine = Engine::new(mpo, start, penalties, settings.seed)?;
    let mut sweeps = Vec::new();
    let mut previous = f64::INFINITY;
    let mut converged = false;
    let schedule_len = settings.chi_schedule.len().max(settings.noise_schedule.len());
    for sweep in 0..settings.max_sweeps {
        // looser local solves while the basis is still being built
        let tol = if sweep + 1 < schedule_len { (settings.lanczos_tol * 1e3).min(1e-6) } else { settings.lanczos_tol };
        let opts = LanczosOptions { max_krylov: settings.lanczos_krylov, max_restarts: 8, tol };
        let (energy, max_trunc) = engine.sweep(settings.chi_at(sweep), settings.cutoff, settings.noise_at(sweep), &opts)?;
        let record = SweepRecord { sweep, energy, max_trunc_err: max_trunc, max_chi: engine.state.max_bond_dim() };
        log::debug!("dmrg sweep {sweep}: E = {energy:.14} trunc = {max_trunc:.2e} chi = {}", record.max_chi);
        sweeps.push(record);
        let settled = (previous - energy).abs() < settings.energy_tol * energy.abs().max(1.0);
        previous = energy;
        if sweep + 1 >= settings.min_sweeps && sweep + 1 >= schedule_len && settled {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("DMRG stopped after {} sweeps without meeting the energy tolerance", settings.max_sweeps);
    }
    let mut state = engine.state;
    state.set_chi_max(settings.final_chi());
    Ok(DmrgResult { state, energy: previous, sweeps, converged })
}

/// Ground state and energy of a real Hermitian MPO.
pub fn ground_state(mpo: &Mpo<f64>, settings: &DmrgSettings, initial: Option<&Mps<f64>>) -> Result<DmrgResult> {
    run(mpo, settings, initial, Vec::new())
}

#[derive(Debug, Clone)]
pub struct GapResult {
    pub ground: DmrgResult,
    pub excited: DmrgResult,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    /// `|⟨ψ1|ψ0⟩|`.
    pub overlap: f64,
    /// Gap below `10 ×` the energy tolerance.
    pub degenerate: bool,
}

/// Lowest two energies; the excited state minimizes `H + w|ψ0⟩⟨ψ0|`.
pub fn energy_gap(mpo: &Mpo<f64>, settings: &DmrgSettings) -> Result<GapResult> {
    let ground = ground_state(mpo, settings, None)?;
    let n = mpo.len();
    let weight = settings.penalty_weight.unwrap_or(4.0 * ground.energy.abs() + 1.0);
    let penalty = Penalty::new(&ground.state, weight, n);
    let mut excited_settings = settings.clone();
    excited_settings.seed = settings.seed.wrapping_add(17);
    let excited = run(mpo, &excited_settings, None, vec![penalty])?;
    let overlap = excited.state.overlap(&ground.state)?.abs();
    // report ⟨ψ1|H|ψ1⟩ without the residual penalty contribution
    let e1 = crate::mps::env::contract_expectation(&excited.state, mpo);
    let e0 = ground.energy;
    let gap = e1 - e0;
    let degenerate = gap < 10.0 * settings.energy_tol.max(settings.lanczos_tol) * e0.abs().max(1.0);
    Ok(GapResult { e0, e1, gap, overlap, degenerate, ground, excited })
}

#[derive(Debug, Clone, Copy)]
pub struct Bandwidth {
    pub e_min: f64,
    pub e_max: f64,
    pub width: f64,
}

/// `E_max - E_min`, with `E_max` from DMRG on `-H`.
pub fn spectral_bandwidth(mpo: &Mpo<f64>, settings: &DmrgSettings) -> Result<Bandwidth> {
    let low = ground_state(mpo, settings, None)?;
    let high = ground_state(&mpo.scaled(-1.0), settings, None)?;
    let (e_min, e_max) = (low.energy, -high.energy);
    Ok(Bandwidth { e_min, e_max, width: e_max - e_min })
}

/// Local value `⟨h_{i,j}⟩` at one x-bond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalValue {
    pub col: usize,
    pub row: usize,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct InstantaneousGround {
    pub t: f64,
    pub energy: f64,
    pub local: Vec<LocalValue>,
    pub converged: bool,
}

/// Local energy densities `⟨h_{i,j}⟩` of a state for the given fields.
pub fn local_energies<T: crate::mps::Scalar>(
    state: &Mps<T>,
    geometry: &LatticeGeometry,
    fields: &[f64],
    j: f64,
) -> Result<Vec<LocalValue>> {
    let cache = MeasureCache::new(state)?;
    local_energy_operators(geometry, fields, j)?
        .iter()
        .map(|term| {
            Ok(LocalValue { col: term.col, row: term.row, x: term.x, value: cache.expect_sum(&term.op)? })
        })
        .collect()
}

/// Ground energies `E0(t)` of the frozen Hamiltonian `H(t)`, cached per time.
/// Each solve starts from the most recent ground state.
pub struct InstantaneousGroundTracker {
    geometry: LatticeGeometry,
    params: ModelParams,
    settings: DmrgSettings,
    cache: BTreeMap<u64, InstantaneousGround>,
    last_state: Option<Mps<f64>>,
}

impl InstantaneousGroundTracker {
    pub fn new(geometry: LatticeGeometry, params: ModelParams, settings: DmrgSettings) -> Self {
        Self { geometry, params, settings, cache: BTreeMap::new(), last_state: None }
    }

    pub fn at(&mut self, t: f64) -> Result<&InstantaneousGround> {
        crate::error::ensure_finite("t", t)?;
        let key = t.to_bits();
        if !self.cache.contains_key(&key) {
            let fields = fields_at(&self.geometry, &self.params, t)?;
            let mpo = hamiltonian_mpo::<f64>(&self.geometry, &fields, self.params.j)?;
            let result = ground_state(&mpo, &self.settings, self.last_state.as_ref())?;
            let local = if self.geometry.lx() >= 2 {
                local_energies(&result.state, &self.geometry, &fields, self.params.j)?
            } else {
                Vec::new()
            };
            let record = InstantaneousGround { t, energy: result.energy, local, converged: result.converged };
            self.last_state = Some(result.state);
            self.cache.insert(key, record);
        }
        Ok(&self.cache[&key])
    }

    pub fn cached_times(&self) -> Vec<f64> {
        self.cache.values().map(|r| r.t).collect()
    }
}
