//! Run configuration: flat `section.key = value` text.
//!
//! ```text
//! # 3 x 4 cylinder, exact bond dimension
//! geometry.Ly = 3
//! geometry.Lx = 4
//! quench.v = 2
//! mps.exact = true
//! ```
//!
//! Unknown keys are rejected. Command-line overrides use the same keys.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::pseudo_critical_field;
use crate::dmrg::DmrgSettings;
use crate::lattice::{LatticeGeometry, ModelParams};
use crate::quench::{Kick, QuenchProtocol, QuenchSettings};
use crate::tdvp::{TdvpMode, TdvpSettings};
use crate::{Error, Result};

/// Critical field: fixed, or the width-dependent pseudo-critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CriticalField {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub j: f64,
    pub gc: CriticalField,
    pub h_factor: f64,
    pub lx: Option<usize>,
    pub aspect: usize,
    pub ly: usize,
    pub y_periodic: bool,
    pub v: f64,
    pub tau: f64,
    pub dt: f64,
    pub order: u8,
    pub t_end: Option<f64>,
    pub chi_max: usize,
    pub cutoff: f64,
    pub exact: bool,
    pub tdvp_mode: TdvpMode,
    pub krylov_dim: usize,
    pub overflow_weight: f64,
    pub dmrg_chi: usize,
    pub dmrg_max_sweeps: usize,
    pub dmrg_energy_tol: f64,
    pub dmrg_noise: f64,
    pub energy_every: usize,
    pub entropy_every: usize,
    pub local_every: usize,
    pub average_rows: bool,
    pub light_g: Option<f64>,
    pub light_t_max: f64,
    pub light_measure_every: f64,
    pub light_threshold: f64,
    pub light_kick: Kick,
    pub oracle_dt_micro: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub memory_cap_gb: f64,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            j: 1.0,
            gc: CriticalField::Auto,
            h_factor: 5.0,
            lx: None,
            aspect: 8,
            ly: 2,
            y_periodic: true,
            v: 2.0,
            tau: 0.4,
            dt: 0.05,
            order: 4,
            t_end: None,
            chi_max: 512,
            cutoff: 1e-10,
            exact: false,
            tdvp_mode: TdvpMode::TwoSite,
            krylov_dim: 40,
            overflow_weight: 1e-5,
            dmrg_chi: 128,
            dmrg_max_sweeps: 30,
            dmrg_energy_tol: 1e-10,
            dmrg_noise: 1e-4,
            energy_every: 1,
            entropy_every: 1,
            local_every: 10,
            average_rows: false,
            light_g: None,
            light_t_max: 4.0,
            light_measure_every: 0.1,
            light_threshold: 0.02,
            light_kick: Kick::SigmaX,
            oracle_dt_micro: 0.005,
            output_dir: PathBuf::from("run"),
            seed: 1,
            memory_cap_gb: 8.0,
            threads: 1,
        }
    }
}

/// Accepted keys, in the order they are written back out.
pub const KEYS: &[&str] = &[
    "model.J",
    "model.gc",
    "model.hFactor",
    "geometry.Lx",
    "geometry.aspect",
    "geometry.Ly",
    "geometry.yPeriodic",
    "quench.v",
    "quench.tau",
    "quench.dt",
    "quench.order",
    "quench.tEnd",
    "mps.chiMax",
    "mps.cutoff",
    "mps.exact",
    "mps.mode",
    "mps.krylovDim",
    "mps.overflowWeight",
    "dmrg.chi",
    "dmrg.maxSweeps",
    "dmrg.energyTol",
    "dmrg.noise",
    "schedule.energyEvery",
    "schedule.entropyEvery",
    "schedule.localEvery",
    "schedule.averageRows",
    "lightcone.g",
    "lightcone.tMax",
    "lightcone.measureEvery",
    "lightcone.threshold",
    "lightcone.kick",
    "oracle.dtMicro",
    "output.dir",
    "run.seed",
    "run.memoryCapGb",
    "run.threads",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    match value.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        _ => {
            let v: f64 = parse(key, value)?;
            if v.is_nan() {
                return Err(Error::Config(format!("{key}: NaN is not allowed")));
            }
            Ok(v)
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true/false, got '{value}'"))),
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}

impl RunConfig {
    /// Read a config file; keys not set keep their defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model.J" => self.j = parse_f64(key, value)?,
            "model.gc" => {
                self.gc = if value.eq_ignore_ascii_case("auto") {
                    CriticalField::Auto
                } else {
                    CriticalField::Value(parse_f64(key, value)?)
                }
            }
            "model.hFactor" => self.h_factor = parse_f64(key, value)?,
            "geometry.Lx" => {
                self.lx = if value.eq_ignore_ascii_case("auto") { None } else { Some(parse(key, value)?) }
            }
            "geometry.aspect" => self.aspect = parse(key, value)?,
            "geometry.Ly" => self.ly = parse(key, value)?,
            "geometry.yPeriodic" => self.y_periodic = parse_bool(key, value)?,
            "quench.v" => self.v = parse_f64(key, value)?,
            "quench.tau" => self.tau = parse_f64(key, value)?,
            "quench.dt" => self.dt = parse_f64(key, value)?,
            "quench.order" => self.order = parse(key, value)?,
            "quench.tEnd" => {
                self.t_end = if value.eq_ignore_ascii_case("tq") { None } else { Some(parse_f64(key, value)?) }
            }
            "mps.chiMax" => self.chi_max = parse(key, value)?,
            "mps.cutoff" => self.cutoff = parse_f64(key, value)?,
            "mps.exact" => self.exact = parse_bool(key, value)?,
            "mps.mode" => {
                self.tdvp_mode = match value {
                    "two-site" | "2" => TdvpMode::TwoSite,
                    "one-site" | "1" => TdvpMode::OneSite,
                    _ => return Err(Error::Config(format!("{key}: expected two-site or one-site, got '{value}'"))),
                }
            }
            "mps.krylovDim" => self.krylov_dim = parse(key, value)?,
            "mps.overflowWeight" => self.overflow_weight = parse_f64(key, value)?,
            "dmrg.chi" => self.dmrg_chi = parse(key, value)?,
            "dmrg.maxSweeps" => self.dmrg_max_sweeps = parse(key, value)?,
            "dmrg.energyTol" => self.dmrg_energy_tol = parse_f64(key, value)?,
            "dmrg.noise" => self.dmrg_noise = parse_f64(key, value)?,
            "schedule.energyEvery" => self.energy_every = parse(key, value)?,
            "schedule.entropyEvery" => self.entropy_every = parse(key, value)?,
            "schedule.localEvery" => self.local_every = parse(key, value)?,
            "schedule.averageRows" => self.average_rows = parse_bool(key, value)?,
            "lightcone.g" => {
                self.light_g = if value.eq_ignore_ascii_case("auto") { None } else { Some(parse_f64(key, value)?) }
            }
            "lightcone.tMax" => self.light_t_max = parse_f64(key, value)?,
            "lightcone.measureEvery" => self.light_measure_every = parse_f64(key, value)?,
            "lightcone.threshold" => self.light_threshold = parse_f64(key, value)?,
            "lightcone.kick" => {
                self.light_kick = match value.to_ascii_lowercase().as_str() {
                    "x" | "sx" | "sigmax" => Kick::SigmaX,
                    "z" | "sz" | "sigmaz" => Kick::SigmaZ,
                    _ => return Err(Error::Config(format!("{key}: expected x or z, got '{value}'"))),
                }
            }
            "oracle.dtMicro" => self.oracle_dt_micro = parse_f64(key, value)?,
            "output.dir" => self.output_dir = PathBuf::from(value),
            "run.seed" => self.seed = parse(key, value)?,
            "run.memoryCapGb" => self.memory_cap_gb = parse_f64(key, value)?,
            "run.threads" => self.threads = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Apply `key=value` overrides (as given on the command line).
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .as_ref()
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{}' is not key=value", o.as_ref())))?;
            self.set(k.trim(), v.trim())?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.ly == 0 || self.aspect == 0 || self.lx == Some(0) {
            return bad("lattice dimensions must be positive");
        }
        if !(self.j > 0.0) || !(self.h_factor >= 0.0) || !(self.tau >= 0.0) {
            return bad("J > 0, hFactor ≥ 0 and τ ≥ 0 required");
        }
        if !(self.v > 0.0) {
            return bad("quench.v must be positive (inf for a uniform quench)");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || (self.order != 2 && self.order != 4) {
            return bad("quench.dt must be positive and quench.order 2 or 4");
        }
        if self.chi_max == 0 || self.dmrg_chi == 0 || self.cutoff < 0.0 {
            return bad("bond dimensions must be positive and cutoff non-negative");
        }
        if self.energy_every == 0 || self.entropy_every == 0 || self.local_every == 0 {
            return bad("schedule intervals must be at least 1");
        }
        if self.threads == 0 {
            return bad("run.threads must be at least 1");
        }
        if let CriticalField::Value(g) = self.gc {
            if !g.is_finite() {
                return bad("model.gc must be finite");
            }
        }
        Ok(())
    }

    pub fn lx(&self) -> usize {
        self.lx.unwrap_or(self.aspect * self.ly)
    }

    pub fn gc(&self) -> f64 {
        match self.gc {
            CriticalField::Value(g) => g,
            // a single chain is critical exactly at g = J
            CriticalField::Auto if self.ly == 1 => 1.0,
            CriticalField::Auto => pseudo_critical_field(self.ly),
        }
    }

    /// A single row is always an open chain.
    pub fn geometry(&self) -> Result<LatticeGeometry> {
        LatticeGeometry::new(self.lx(), self.ly, self.y_periodic && self.ly > 1)
    }

    pub fn params(&self) -> ModelParams {
        let gc = self.gc();
        ModelParams { j: self.j, gc, h: self.h_factor * gc * self.j, v: self.v, tau: self.tau }
    }

    pub fn dmrg_settings(&self) -> DmrgSettings {
        let mut s = DmrgSettings::with_chi(self.dmrg_chi);
        s.max_sweeps = self.dmrg_max_sweeps;
        s.energy_tol = self.dmrg_energy_tol;
        s.seed = self.seed;
        s.noise_schedule = vec![self.dmrg_noise, self.dmrg_noise * 0.1, self.dmrg_noise * 0.01];
        if self.exact {
            s.energy_tol = s.energy_tol.min(1e-12);
            s.lanczos_tol = 1e-11;
        }
        s
    }

    pub fn tdvp_settings(&self) -> TdvpSettings {
        TdvpSettings {
            dt: self.dt,
            order: self.order,
            chi_max: self.chi_max,
            cutoff: self.cutoff,
            krylov_dim: self.krylov_dim,
            mode: self.tdvp_mode,
            overflow_weight: (self.overflow_weight > 0.0).then_some(self.overflow_weight),
            ..TdvpSettings::default()
        }
    }

    pub fn quench_protocol(&self) -> Result<QuenchProtocol> {
        let mut p = QuenchProtocol::new(self.geometry()?, self.params());
        p.t_end = self.t_end;
        p.energy_every = self.energy_every;
        p.entropy_every = self.entropy_every;
        p.local_every = self.local_every;
        p.average_rows = self.average_rows;
        Ok(p)
    }

    pub fn quench_settings(&self) -> QuenchSettings {
        QuenchSettings { dmrg: self.dmrg_settings(), tdvp: self.tdvp_settings(), exact: self.exact }
    }

    /// Output directory, resolved against `$QUENCH2D_OUTPUT_ROOT` when relative.
    pub fn resolved_output_dir(&self) -> PathBuf {
        if self.output_dir.is_absolute() {
            return self.output_dir.clone();
        }
        match std::env::var_os(OUTPUT_ROOT_VAR) {
            Some(root) => PathBuf::from(root).join(&self.output_dir),
            None => self.output_dir.clone(),
        }
    }

    /// Every key with its resolved value (derived quantities included).
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("model.J", fmt_f64(self.j));
        put("model.gc", fmt_f64(self.gc()));
        put("model.hFactor", fmt_f64(self.h_factor));
        put("model.h", fmt_f64(self.params().h));
        put("geometry.Lx", self.lx().to_string());
        put("geometry.aspect", self.aspect.to_string());
        put("geometry.Ly", self.ly.to_string());
        put("geometry.yPeriodic", self.y_periodic.to_string());
        put("quench.v", fmt_f64(self.v));
        put("quench.tau", fmt_f64(self.tau));
        put("quench.t0", fmt_f64(self.params().t0()));
        put("quench.dt", fmt_f64(self.dt));
        put("quench.order", self.order.to_string());
        put("quench.tEnd", self.t_end.map_or("tq".into(), fmt_f64));
        put("mps.chiMax", self.chi_max.to_string());
        put("mps.cutoff", fmt_f64(self.cutoff));
        put("mps.exact", self.exact.to_string());
        put("mps.mode", if self.tdvp_mode == TdvpMode::TwoSite { "two-site".into() } else { "one-site".into() });
        put("mps.krylovDim", self.krylov_dim.to_string());
        put("mps.overflowWeight", fmt_f64(self.overflow_weight));
        put("dmrg.chi", self.dmrg_chi.to_string());
        put("dmrg.maxSweeps", self.dmrg_max_sweeps.to_string());
        put("dmrg.energyTol", fmt_f64(self.dmrg_energy_tol));
        put("dmrg.noise", fmt_f64(self.dmrg_noise));
        put("schedule.energyEvery", self.energy_every.to_string());
        put("schedule.entropyEvery", self.entropy_every.to_string());
        put("schedule.localEvery", self.local_every.to_string());
        put("schedule.averageRows", self.average_rows.to_string());
        put("lightcone.g", fmt_f64(self.light_g.unwrap_or_else(|| self.gc())));
        put("lightcone.tMax", fmt_f64(self.light_t_max));
        put("lightcone.measureEvery", fmt_f64(self.light_measure_every));
        put("lightcone.threshold", fmt_f64(self.light_threshold));
        put("lightcone.kick", if self.light_kick == Kick::SigmaX { "x".into() } else { "z".into() });
        put("oracle.dtMicro", fmt_f64(self.oracle_dt_micro));
        put("output.dir", self.output_dir.display().to_string());
        put("run.seed", self.seed.to_string());
        put("run.memoryCapGb", fmt_f64(self.memory_cap_gb));
        put("run.threads", self.threads.to_string());
        m
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let r = self.resolved();
        let mut out = String::new();
        for key in KEYS {
            let value = match *key {
                "model.gc" if self.gc == CriticalField::Auto => "auto".to_string(),
                "geometry.Lx" if self.lx.is_none() => "auto".to_string(),
                "lightcone.g" if self.light_g.is_none() => "auto".to_string(),
                _ => r[*key].clone(),
            };
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }
}

/// Environment variable naming the root for relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "QUENCH2D_OUTPUT_ROOT";

/// Rough peak memory of a run in bytes: MPS, environments and the two-site
/// Krylov workspace at bond dimension `chi`.
pub fn estimate_memory_bytes(n_sites: usize, chi: usize, mpo_dim: usize, krylov_dim: usize) -> f64 {
    let c = chi as f64;
    let bytes = 16.0;
    let mps = n_sites as f64 * 2.0 * c * c * bytes;
    let envs = n_sites as f64 * mpo_dim as f64 * c * c * bytes;
    let krylov = (krylov_dim as f64 + 2.0) * 4.0 * c * c * bytes;
    mps + envs + krylov
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_standard_setup() {
        let cfg = RunConfig::from_text("geometry.Ly = 5\n").unwrap();
        assert_eq!(cfg.lx(), 40);
        let p = cfg.params();
        assert!((p.h - 5.0 * p.gc).abs() < 1e-14);
        assert!((p.t0() + 2.0 * cfg.tau).abs() < 1e-15);
        assert!((p.gc - pseudo_critical_field(5)).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(matches!(RunConfig::from_text("model.j = 1\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("quench.order = 3\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("geometry.Ly 3\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("mps.exact = maybe\n"), Err(Error::Config(_))));
    }

    #[test]
    fn text_round_trip_and_overrides() {
        let mut cfg = RunConfig::from_text("geometry.Ly = 3 # width\nquench.v = inf\nmodel.gc = 3.04438\n").unwrap();
        assert!(cfg.params().is_uniform());
        let again = RunConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
        cfg.apply_overrides(&["quench.v=3", "geometry.Lx = 6"]).unwrap();
        assert_eq!((cfg.v, cfg.lx()), (3.0, 6));
        assert!(cfg.apply_overrides(&["nope=1"]).is_err());
    }
}
