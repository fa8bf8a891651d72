//! Experiment orchestration.
//!
//! A quench run prepares the ground state of `H(t0)` with DMRG, evolves it
//! with TDVP under the moving-front Hamiltonian and records the observable
//! series: total and excitation energy, the local excitation energy map,
//! `σˣ` correlations from the central site and the entanglement entropy at
//! every cut between columns. The same series can be produced by the exact
//! oracle for small systems.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::analysis::{velocity_from_front, FrontVelocity};
use crate::dmrg::{ground_state, local_energies, DmrgSettings, InstantaneousGroundTracker};
use crate::ed::{dense_entropy, dense_spectrum, krylov_evolve, DenseOperator};
use crate::lattice::{fields_at, hamiltonian_mpo, local_energy_operators, tfi_hamiltonian, LatticeGeometry, ModelParams};
use crate::mps::env::contract_expectation;
use crate::mps::{bond_entropies, MeasureCache, Mps};
use crate::ops::{Pauli, PauliString};
use crate::tdvp::{evolve, TdvpSettings};
use crate::{Error, Result, C64};

/// Which local operator kicks the state in the light-cone experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kick {
    SigmaX,
    SigmaZ,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuenchProtocol {
    pub geometry: LatticeGeometry,
    pub params: ModelParams,
    /// End of the run; `None` means the arrival time `t_q`.
    pub t_end: Option<f64>,
    /// Measure `E`, `E0` and `ε` every this many steps (and at `t_q`, `t_end`).
    pub energy_every: usize,
    /// Measure the entropy at every cut every this many steps.
    pub entropy_every: usize,
    /// Measure the local excitation map every this many steps.
    pub local_every: usize,
    /// Average correlation rows over all `y` instead of using row 0.
    pub average_rows: bool,
}

impl QuenchProtocol {
    pub fn new(geometry: LatticeGeometry, params: ModelParams) -> Self {
        Self { geometry, params, t_end: None, energy_every: 1, entropy_every: 1, local_every: 10, average_rows: false }
    }

    /// Time at which the front has passed the outermost column,
    /// `max |x| / v`; for a uniform quench the mirror of the start time, `2τ`.
    pub fn tq(&self) -> f64 {
        if self.params.is_uniform() {
            2.0 * self.params.tau
        } else {
            self.geometry.max_abs_x() / self.params.v
        }
    }

    pub fn t0(&self) -> f64 {
        self.params.t0()
    }

    pub fn end_time(&self) -> f64 {
        self.t_end.unwrap_or_else(|| self.tq())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.end_time() < self.tq() - 1e-12 {
            return Err(Error::InvalidInput("t_end must not precede t_q".into()));
        }
        if self.energy_every == 0 || self.entropy_every == 0 || self.local_every == 0 {
            return Err(Error::InvalidInput("measurement intervals must be at least 1".into()));
        }
        Ok(())
    }

    /// Step times from `t0` to `t_end` with `t_q` inserted, each tagged with
    /// the observables measured there.
    pub fn schedule(&self, dt: f64) -> Vec<ScheduledTime> {
        let (t0, tq, tend) = (self.t0(), self.tq(), self.end_time());
        let mut times = Vec::new();
        let mut k = 0usize;
        loop {
            let t = t0 + k as f64 * dt;
            if t >= tend - 1e-12 {
                break;
            }
            times.push((k, t));
            k += 1;
        }
        times.push((k, tend));
        if !times.iter().any(|&(_, t)| (t - tq).abs() < 1e-12) {
            let pos = times.iter().position(|&(_, t)| t > tq).unwrap_or(times.len());
            times.insert(pos, (usize::MAX, tq));
        }
        let last = times.len() - 1;
        times
            .into_iter()
            .enumerate()
            .map(|(i, (k, t))| {
                let special = i == last || (t - tq).abs() < 1e-12;
                let every = |n: usize| special || (k != usize::MAX && k % n == 0);
                ScheduledTime {
                    t,
                    energy: every(self.energy_every),
                    entropy: every(self.entropy_every),
                    local: every(self.local_every),
                    correlations: (t - tq).abs() < 1e-12 || i == last,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduledTime {
    pub t: f64,
    pub energy: bool,
    pub entropy: bool,
    pub local: bool,
    pub correlations: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub energy: f64,
    pub e0: f64,
    /// `(⟨H⟩ - E0) / N`.
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalRecord {
    pub t: f64,
    pub col: usize,
    pub row: usize,
    pub x: f64,
    /// `⟨h⟩ - ⟨h⟩_0` at this x-bond.
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub t: f64,
    pub r: usize,
    pub cx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub t: f64,
    /// Index of the cut (between columns `xbond` and `xbond + 1`).
    pub xbond: usize,
    pub x: f64,
    pub svn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub t: f64,
    pub discarded: f64,
    pub chi: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub source: String,
    pub tq: f64,
    pub energy: Vec<EnergyRecord>,
    pub local: Vec<LocalRecord>,
    pub correlations: Vec<CorrelationRecord>,
    pub entropy: Vec<EntropyRecord>,
    pub truncation: Vec<TruncationRecord>,
    /// Set when the run stopped early (χ overflow); the series is partial.
    pub stopped_at: Option<f64>,
}

impl ObservableSeries {
    pub fn energy_at(&self, t: f64) -> Option<&EnergyRecord> {
        self.energy.iter().find(|r| (r.t - t).abs() < 1e-12)
    }

    pub fn local_at(&self, t: f64) -> Vec<LocalRecord> {
        self.local.iter().filter(|r| (r.t - t).abs() < 1e-12).copied().collect()
    }

    pub fn correlations_at(&self, t: f64) -> Vec<CorrelationRecord> {
        self.correlations.iter().filter(|r| (r.t - t).abs() < 1e-12).copied().collect()
    }

    pub fn entropy_at(&self, t: f64) -> Vec<EntropyRecord> {
        self.entropy.iter().filter(|r| (r.t - t).abs() < 1e-12).copied().collect()
    }

    /// Mean local excitation energy at `t` over x-bonds whose two columns
    /// both satisfy `|x| < half_width`.
    pub fn region_mean(&self, t: f64, geometry: &LatticeGeometry, half_width: f64) -> Option<f64> {
        let inside: Vec<f64> = self
            .local_at(t)
            .iter()
            .filter(|r| {
                geometry.x_coord(r.col).abs() < half_width && geometry.x_coord(r.col + 1).abs() < half_width
            })
            .map(|r| r.eps)
            .collect();
        (!inside.is_empty()).then(|| inside.iter().sum::<f64>() / inside.len() as f64)
    }

    /// Mean over the central `2 Ly × Ly` region.
    pub fn central_mean(&self, t: f64, geometry: &LatticeGeometry) -> Option<f64> {
        self.region_mean(t, geometry, geometry.ly() as f64)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct QuenchSettings {
    pub dmrg: DmrgSettings,
    pub tdvp: TdvpSettings,
    /// Pad bonds to their maximal dimension and never truncate.
    pub exact: bool,
}

impl QuenchSettings {
    /// DMRG settings for the initial state and the ground-state reference.
    /// In the exact regime nothing above round-off is discarded.
    fn ground_settings(&self) -> DmrgSettings {
        let mut dmrg = self.dmrg.clone();
        if self.exact {
            dmrg.cutoff = dmrg.cutoff.min(1e-14);
        }
        dmrg
    }

    pub fn exact(dt: f64, order: u8) -> Self {
        let mut dmrg = DmrgSettings::with_chi(256);
        dmrg.energy_tol = 1e-12;
        dmrg.lanczos_tol = 1e-11;
        Self { dmrg, tdvp: TdvpSettings::exact(dt, order), exact: true }
    }
}

/// Indices of the correlation row: reference site and `(r, site)` targets.
fn correlation_sites(geometry: &LatticeGeometry, row: usize) -> (usize, Vec<(usize, usize)>) {
    let c = geometry.center_col();
    let origin = geometry.site_index(c, row);
    let targets = (c + 1..geometry.lx()).map(|col| (col - c, geometry.site_index(col, row))).collect();
    (origin, targets)
}

fn rows_for(protocol: &QuenchProtocol) -> Vec<usize> {
    if protocol.average_rows {
        (0..protocol.geometry.ly()).collect()
    } else {
        vec![0]
    }
}

/// Shared measurement logic for MPS and dense states.
trait Probe {
    fn energy(&self, fields: &[f64], j: f64) -> Result<f64>;
    fn local(&self, fields: &[f64], j: f64) -> Result<Vec<(usize, usize, f64, f64)>>;
    fn xx_row(&self, origin: usize, targets: &[usize]) -> Result<Vec<f64>>;
    fn entropies(&self, bonds: &[usize]) -> Result<Vec<f64>>;
}

struct MpsProbe<'a> {
    state: &'a Mps<C64>,
    geometry: &'a LatticeGeometry,
}

impl Probe for MpsProbe<'_> {
    fn energy(&self, fields: &[f64], j: f64) -> Result<f64> {
        let mpo = hamiltonian_mpo::<C64>(self.geometry, fields, j)?;
        let norm2 = self.state.overlap(self.state)?.re;
        Ok(contract_expectation(self.state, &mpo).re / norm2)
    }

    fn local(&self, fields: &[f64], j: f64) -> Result<Vec<(usize, usize, f64, f64)>> {
        Ok(local_energies(self.state, self.geometry, fields, j)?.into_iter().map(|v| (v.col, v.row, v.x, v.value)).collect())
    }

    fn xx_row(&self, origin: usize, targets: &[usize]) -> Result<Vec<f64>> {
        let x = Pauli::X.matrix().mapv(C64::from);
        let cache = MeasureCache::new(self.state)?;
        Ok(cache.correlation_row(&x, origin, &x, targets)?.into_iter().map(|c| c.re).collect())
    }

    fn entropies(&self, bonds: &[usize]) -> Result<Vec<f64>> {
        let all = bond_entropies(self.state)?;
        Ok(bonds.iter().map(|&b| all[b]).collect())
    }
}

struct DenseProbe<'a> {
    psi: &'a Array1<C64>,
    geometry: &'a LatticeGeometry,
}

impl Probe for DenseProbe<'_> {
    fn energy(&self, fields: &[f64], j: f64) -> Result<f64> {
        Ok(DenseOperator::new(&tfi_hamiltonian(self.geometry, fields, j)?)?.expectation(self.psi))
    }

    fn local(&self, fields: &[f64], j: f64) -> Result<Vec<(usize, usize, f64, f64)>> {
        local_energy_operators(self.geometry, fields, j)?
            .iter()
            .map(|term| Ok((term.col, term.row, term.x, DenseOperator::new(&term.op)?.expectation(self.psi))))
            .collect()
    }

    fn xx_row(&self, origin: usize, targets: &[usize]) -> Result<Vec<f64>> {
        let n = self.geometry.n_sites();
        targets
            .iter()
            .map(|&t| {
                let mut op = crate::ops::PauliSum::new(n);
                op.push(PauliString::two(1.0, origin, Pauli::X, t, Pauli::X)?)?;
                Ok(DenseOperator::new(&op)?.expectation(self.psi))
            })
            .collect()
    }

    fn entropies(&self, bonds: &[usize]) -> Result<Vec<f64>> {
        let n = self.geometry.n_sites();
        bonds.iter().map(|&b| dense_entropy(self.psi, n, b)).collect()
    }
}

/// Instantaneous ground energy and local ground-state energies.
trait GroundReference {
    fn at(&mut self, t: f64) -> Result<(f64, Vec<f64>)>;
}

impl GroundReference for InstantaneousGroundTracker {
    fn at(&mut self, t: f64) -> Result<(f64, Vec<f64>)> {
        let g = InstantaneousGroundTracker::at(self, t)?;
        Ok((g.energy, g.local.iter().map(|v| v.value).collect()))
    }
}

struct DenseGround<'a> {
    protocol: &'a QuenchProtocol,
}

impl GroundReference for DenseGround<'_> {
    fn at(&mut self, t: f64) -> Result<(f64, Vec<f64>)> {
        let p = self.protocol;
        let fields = fields_at(&p.geometry, &p.params, t)?;
        let spec = dense_spectrum(&tfi_hamiltonian(&p.geometry, &fields, p.params.j)?, 1)?;
        let probe = DenseProbe { psi: &spec.vectors[0].mapv(C64::from), geometry: &p.geometry };
        let local = if p.geometry.lx() >= 2 { probe.local(&fields, p.params.j)?.iter().map(|v| v.3).collect() } else { Vec::new() };
        Ok((spec.values[0], local))
    }
}

fn record(
    series: &mut ObservableSeries,
    protocol: &QuenchProtocol,
    what: &ScheduledTime,
    probe: &dyn Probe,
    ground: &mut dyn GroundReference,
) -> Result<()> {
    let geom = &protocol.geometry;
    let t = what.t;
    let fields = fields_at(geom, &protocol.params, t)?;
    let j = protocol.params.j;
    let needs_ground = what.energy || (what.local && geom.lx() >= 2);
    let (e0, local0) = if needs_ground { ground.at(t)? } else { (f64::NAN, Vec::new()) };
    if what.energy {
        let e = probe.energy(&fields, j)?;
        series.energy.push(EnergyRecord { t, energy: e, e0, eps: (e - e0) / geom.n_sites() as f64 });
    }
    if what.local && geom.lx() >= 2 {
        for ((col, row, x, value), base) in probe.local(&fields, j)?.into_iter().zip(local0) {
            series.local.push(LocalRecord { t, col, row, x, eps: value - base });
        }
    }
    if what.correlations {
        let rows = rows_for(protocol);
        let mut sums: Vec<f64> = Vec::new();
        for &row in &rows {
            let (origin, targets) = correlation_sites(geom, row);
            let sites: Vec<usize> = targets.iter().map(|&(_, s)| s).collect();
            let values = probe.xx_row(origin, &sites)?;
            if sums.is_empty() {
                sums = vec![0.0; values.len()];
            }
            for (s, v) in sums.iter_mut().zip(values) {
                *s += v / rows.len() as f64;
            }
        }
        series.correlations.push(CorrelationRecord { t, r: 0, cx: 1.0 });
        for (r, cx) in sums.into_iter().enumerate() {
            series.correlations.push(CorrelationRecord { t, r: r + 1, cx });
        }
    }
    if what.entropy && geom.n_sites() >= 2 {
        let cuts: Vec<usize> = (0..geom.n_x_cuts()).collect();
        let bonds: Vec<usize> = cuts.iter().map(|&c| geom.x_cut_bond(c)).collect();
        for (c, s) in cuts.into_iter().zip(probe.entropies(&bonds)?) {
            series.entropy.push(EntropyRecord { t, xbond: c, x: geom.x_cut_coord(c), svn: s });
        }
    }
    Ok(())
}

/// Ground state of `H(t0)` as a complex MPS, padded when running exactly.
pub fn prepare_initial_state(protocol: &QuenchProtocol, settings: &QuenchSettings) -> Result<Mps<C64>> {
    let fields = fields_at(&protocol.geometry, &protocol.params, protocol.t0())?;
    let mpo = hamiltonian_mpo::<f64>(&protocol.geometry, &fields, protocol.params.j)?;
    let dmrg = settings.ground_settings();
    let gs = ground_state(&mpo, &dmrg, None)?;
    if !gs.converged {
        log::warn!("initial-state DMRG did not meet its tolerance");
    }
    let mut state = gs.state.to_complex();
    if settings.exact {
        state.pad_bond_dims(usize::MAX / 4, dmrg.seed)?;
    }
    Ok(state)
}

/// Callback receiving the state and the series so far at every scheduled
/// time (used for checkpoints).
pub type StateHook<'a> = dyn FnMut(f64, &Mps<C64>, &ObservableSeries) -> Result<()> + 'a;

/// Saved progress of a quench.
#[derive(Debug, Clone)]
pub struct ResumePoint {
    pub state: Mps<C64>,
    pub t: f64,
    pub series: ObservableSeries,
}

/// Spatiotemporal quench with MPS.
///
/// With `resume` the run continues from a saved state; scheduled times up to
/// and including the saved time are not measured again.
pub fn run_quench(
    protocol: &QuenchProtocol,
    settings: &QuenchSettings,
    resume: Option<ResumePoint>,
    hook: Option<&mut StateHook<'_>>,
) -> Result<(ObservableSeries, Mps<C64>)> {
    protocol.validate()?;
    settings.tdvp.validate()?;
    let geom = protocol.geometry;
    let params = protocol.params;
    let (mut state, t_start, prior) = match resume {
        Some(r) => (r.state, r.t, Some(r.series)),
        None => (prepare_initial_state(protocol, settings)?, protocol.t0(), None),
    };
    let resumed = prior.is_some();
    let mut tdvp = settings.tdvp.clone();
    if settings.exact {
        tdvp.cutoff = 0.0;
        tdvp.chi_max = usize::MAX / 4;
        tdvp.overflow_weight = None;
    }
    let schedule: Vec<ScheduledTime> =
        protocol
            .schedule(tdvp.dt)
            .into_iter()
            .filter(|s| if resumed { s.t > t_start + 1e-12 } else { s.t >= t_start - 1e-12 })
            .collect();
    let times: Vec<f64> = schedule.iter().map(|s| s.t).collect();
    let mut ground = InstantaneousGroundTracker::new(geom, params, settings.ground_settings());
    let mut series =
        prior.unwrap_or_else(|| ObservableSeries { source: "mps".into(), tq: protocol.tq(), ..Default::default() });
    let mpo_at = |t: f64| hamiltonian_mpo::<C64>(&geom, &fields_at(&geom, &params, t)?, params.j);
    let mut hook = hook;
    let mut index = 0usize;
    let outcome = evolve(&mut state, &mpo_at, t_start, &times, &tdvp, |t, st| {
        let what = schedule[index];
        index += 1;
        debug_assert!((what.t - t).abs() < 1e-12);
        let probe = MpsProbe { state: st, geometry: &geom };
        record(&mut series, protocol, &what, &probe, &mut ground)?;
        series.truncation.push(TruncationRecord { t, discarded: st.truncation_error(), chi: st.max_bond_dim() });
        if let Some(h) = hook.as_mut() {
            h(t, st, &series)?;
        }
        Ok(())
    });
    match outcome {
        Ok(_) => Ok((series, state)),
        Err(Error::ChiOverflow { t, discarded, chi }) => {
            log::warn!("bond dimension {chi} overflowed at t = {t} (discarded {discarded:.2e})");
            series.stopped_at = Some(t);
            Ok((series, state))
        }
        Err(e) => Err(e),
    }
}

/// Same experiment with a spatially uniform front (`v = ∞`).
pub fn uniform_quench_baseline(protocol: &QuenchProtocol, settings: &QuenchSettings) -> Result<ObservableSeries> {
    let mut uniform = protocol.clone();
    uniform.params.v = f64::INFINITY;
    if uniform.t_end.is_some_and(|t| t < uniform.tq()) {
        uniform.t_end = None;
    }
    Ok(run_quench(&uniform, settings, None, None)?.0)
}

/// The quench evolved exactly: dense ground states and Krylov time-ordered
/// evolution with micro-steps of at most `dt_micro`.
pub fn run_quench_oracle(protocol: &QuenchProtocol, dt: f64, dt_micro: f64) -> Result<ObservableSeries> {
    protocol.validate()?;
    let geom = &protocol.geometry;
    let params = protocol.params;
    crate::ed::check_size(geom.n_sites())?;
    let h0 = tfi_hamiltonian(geom, &fields_at(geom, &params, protocol.t0())?, params.j)?;
    let mut psi = dense_spectrum(&h0, 1)?.vectors[0].mapv(C64::from);
    let mut ground = DenseGround { protocol };
    let mut series = ObservableSeries { source: "oracle".into(), tq: protocol.tq(), ..Default::default() };
    let mut t = protocol.t0();
    let h_at = |s: f64| tfi_hamiltonian(geom, &fields_at(geom, &params, s)?, params.j);
    for what in protocol.schedule(dt) {
        psi = krylov_evolve(&psi, h_at, t, what.t, dt_micro)?;
        t = what.t;
        let probe = DenseProbe { psi: &psi, geometry: geom };
        record(&mut series, protocol, &what, &probe, &mut ground)?;
    }
    Ok(series)
}

/// Entropy map of a local kick on the critical ground state.
#[derive(Debug, Clone, Serialize)]
pub struct LightCone {
    pub times: Vec<f64>,
    /// Cut coordinates (bond midpoints).
    pub x: Vec<f64>,
    /// `entropy[t][cut]`.
    pub entropy: Vec<Vec<f64>>,
    pub velocity: Option<FrontVelocity>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LightConeSettings {
    pub dmrg: DmrgSettings,
    pub tdvp: TdvpSettings,
    pub t_max: f64,
    pub measure_every: f64,
    /// Threshold on `S(t) - S(0)` defining the front.
    pub threshold: f64,
    pub kick: Kick,
}

/// Kick the critical ground state at `(col, row)` and record the entropy
/// at every cut; the light-cone velocity is fitted to the front.
pub fn light_cone_experiment(
    geometry: &LatticeGeometry,
    g: f64,
    j: f64,
    site: (usize, usize),
    kick: Option<Kick>,
    settings: &LightConeSettings,
) -> Result<LightCone> {
    let fields = vec![g; geometry.n_sites()];
    let mpo = hamiltonian_mpo::<f64>(geometry, &fields, j)?;
    let gs = ground_state(&mpo, &settings.dmrg, None)?;
    let mut state = gs.state.to_complex();
    if let Some(k) = kick {
        let op = match k {
            Kick::SigmaX => Pauli::X.matrix(),
            Kick::SigmaZ => Pauli::Z.matrix(),
        };
        state.apply_local(&op.mapv(C64::from), geometry.site_index(site.0, site.1))?;
    }
    let cmpo = mpo.to_complex();
    let mpo_at = |_t: f64| Ok(cmpo.clone());
    let steps = (settings.t_max / settings.measure_every).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * settings.measure_every).collect();
    let cuts: Vec<usize> = (0..geometry.n_x_cuts()).collect();
    let bonds: Vec<usize> = cuts.iter().map(|&c| geometry.x_cut_bond(c)).collect();
    let mut entropy = Vec::with_capacity(times.len());
    evolve(&mut state, &mpo_at, 0.0, &times, &settings.tdvp, |_t, st| {
        let all = bond_entropies(st)?;
        entropy.push(bonds.iter().map(|&b| all[b]).collect::<Vec<f64>>());
        Ok(())
    })?;
    let x: Vec<f64> = cuts.iter().map(|&c| geometry.x_cut_coord(c)).collect();
    let origin = geometry.x_coord(site.0);
    let velocity = velocity_from_front(&times, &x, &entropy, origin, settings.threshold).ok();
    Ok(LightCone { times, x, entropy, velocity })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_contains_arrival_time() {
        let geom = LatticeGeometry::cylinder(5, 2).unwrap();
        let p = QuenchProtocol::new(geom, ModelParams::standard(2.0, 3.0, 0.4));
        let s = p.schedule(0.1);
        assert!((s[0].t + 0.8).abs() < 1e-12);
        let tq = p.tq();
        assert!((tq - 2.0 / 3.0).abs() < 1e-12);
        let hit: Vec<&ScheduledTime> = s.iter().filter(|x| (x.t - tq).abs() < 1e-12).collect();
        assert_eq!(hit.len(), 1);
        assert!(hit[0].correlations && hit[0].local && hit[0].energy);
        assert!(s.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn exact_mps_quench_matches_oracle() {
        let geom = LatticeGeometry::cylinder(3, 2).unwrap();
        let mut p = QuenchProtocol::new(geom, ModelParams::standard(2.0, 2.0, 0.4));
        p.local_every = 4;
        let settings = QuenchSettings::exact(0.0125, 4);
        let (mps, _) = run_quench(&p, &settings, None, None).unwrap();
        let exact = run_quench_oracle(&p, 0.0125, 0.001).unwrap();
        assert_eq!(mps.energy.len(), exact.energy.len());
        for (a, b) in mps.energy.iter().zip(&exact.energy) {
            assert!((a.t - b.t).abs() < 1e-12);
            assert!((a.eps - b.eps).abs() < 1e-6, "t={} {} {}", a.t, a.eps, b.eps);
        }
        for (a, b) in mps.entropy.iter().zip(&exact.entropy) {
            assert!((a.svn - b.svn).abs() < 1e-6);
        }
        for (a, b) in mps.local.iter().zip(&exact.local) {
            assert!((a.eps - b.eps).abs() < 1e-6);
        }
        for (a, b) in mps.correlations.iter().zip(&exact.correlations) {
            assert!((a.cx - b.cx).abs() < 1e-6, "{:?} {:?}", a, b);
        }
    }
}
