use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde_json::json;

use quench2d::analysis::{
    fit_gap_collapse, scan_two_delta, CorrelationPoint, GapPoint, CRITICAL,
};
use quench2d::dmrg::{energy_gap, ground_state, write_sweep_log};
use quench2d::ed::{check_size, dense_spectrum};
use quench2d::heatwave::{spatial_energy_profile, total_energy_vs_velocity, EventGrid, HeatwaveParams};
use quench2d::lattice::{hamiltonian_mpo, tfi_hamiltonian, uniform_fields};
use quench2d::quench::{light_cone_experiment, run_quench, run_quench_oracle, LightConeSettings, ObservableSeries, ResumePoint};
use quench2d::store::{estimate_memory_bytes, NumericTable, RunConfig, RunDir};
use quench2d::{Error, Result};

#[derive(Parser)]
#[command(name = "quench2d", version, about = "Spatiotemporal quenches of the 2D transverse-field Ising model")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set geometry.Ly=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Worker threads for the linear algebra backend.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state of the uniform model by DMRG.
    Gs {
        /// Uniform transverse field; defaults to the critical field.
        #[arg(long)]
        g: Option<f64>,
    },
    /// Lowest gap of the uniform model.
    Gap {
        #[arg(long)]
        g: Option<f64>,
    },
    /// Run the spatiotemporal quench.
    Quench {
        /// Also run the exact oracle and write a deviation report.
        #[arg(long)]
        oracle: bool,
        /// Checkpoint every this many measurement times (0 disables).
        #[arg(long, default_value_t = 20)]
        checkpoint_every: usize,
    },
    /// Light-cone velocity from a local kick on the critical ground state.
    Lightcone,
    /// Analytic heat-wave energy profile.
    Heatwave {
        /// Light speed.
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        /// Gap of the final phase.
        #[arg(long, default_value_t = 0.5)]
        mass: f64,
        /// Front velocity; defaults to `quench.v` when that exceeds `c`,
        /// otherwise to `2c`.
        #[arg(long)]
        v: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Finite-size collapse of tabulated data.
    Collapse {
        #[arg(long, value_enum)]
        kind: CollapseKind,
        /// CSV with columns `Ly,g,gap` or `Ly,r,cx`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Compare DMRG and TDVP against exact diagonalization on the configured
    /// (small) system.
    OracleCheck {
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CollapseKind {
    Gap,
    Correlation,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Schema { .. } => 2,
        Error::NotConverged(_) | Error::ChiOverflow { .. } | Error::NoFront(_) | Error::Fit(_) => 3,
        Error::Resource(_) | Error::TooLarge { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&common.overrides)?;
    if let Some(t) = common.threads {
        cfg.set("run.threads", &t.to_string())?;
    }
    if let Some(out) = &common.out {
        cfg.set("output.dir", &out.display().to_string())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check_memory(cfg: &RunConfig, chi: usize) -> Result<()> {
    let n = cfg.lx() * cfg.ly;
    let mpo_dim = 2 + 2 * cfg.ly;
    let bytes = estimate_memory_bytes(n, chi, mpo_dim, cfg.krylov_dim);
    let cap = cfg.memory_cap_gb * 1e9;
    if bytes > cap {
        return Err(Error::Resource(format!("estimated memory {:.2} GB exceeds cap {:.2} GB", bytes / 1e9, cfg.memory_cap_gb)));
    }
    if bytes > 0.5 * cap {
        warn!("estimated memory {:.2} GB is above half the cap", bytes / 1e9);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.common)?;
    let threads = cfg.threads;
    match cli.command {
        Command::Gs { g } => cmd_gs(&cfg, g, threads),
        Command::Gap { g } => cmd_gap(&cfg, g, threads),
        Command::Quench { oracle, checkpoint_every } => cmd_quench(&cfg, oracle, checkpoint_every, threads),
        Command::Lightcone => cmd_lightcone(&cfg, threads),
        Command::Heatwave { c, mass, v, points } => cmd_heatwave(&cfg, c, mass, v, points, threads),
        Command::Collapse { kind, input } => cmd_collapse(&cfg, kind, &input, threads),
        Command::OracleCheck { tolerance } => cmd_oracle_check(&cfg, tolerance, threads),
    }
}

fn cmd_gs(cfg: &RunConfig, g: Option<f64>, threads: usize) -> Result<()> {
    check_memory(cfg, cfg.dmrg_chi)?;
    let geom = cfg.geometry()?;
    let g = g.unwrap_or_else(|| cfg.gc());
    let mpo = hamiltonian_mpo::<f64>(&geom, &uniform_fields(&geom, g), cfg.j)?;
    let gs = ground_state(&mpo, &cfg.dmrg_settings(), None)?;
    let mut run = RunDir::create(&cfg.resolved_output_dir(), "gs")?;
    write_sweep_log(File::create(run.file("dmrg_sweeps.csv"))?, &gs.sweeps)?;
    run.mark_converged("dmrg", gs.converged);
    println!("{:.15}", gs.energy);
    let summary = json!({ "g": g, "E0": gs.energy, "sites": geom.n_sites(), "sweeps": gs.sweeps.len() });
    run.finish(cfg.resolved(), threads, summary)?;
    if !gs.converged {
        return Err(Error::NotConverged("DMRG sweep limit reached".into()));
    }
    Ok(())
}

fn cmd_gap(cfg: &RunConfig, g: Option<f64>, threads: usize) -> Result<()> {
    check_memory(cfg, cfg.dmrg_chi)?;
    let geom = cfg.geometry()?;
    let g = g.unwrap_or_else(|| cfg.gc());
    let mpo = hamiltonian_mpo::<f64>(&geom, &uniform_fields(&geom, g), cfg.j)?;
    let r = energy_gap(&mpo, &cfg.dmrg_settings())?;
    let mut run = RunDir::create(&cfg.resolved_output_dir(), "gap")?;
    run.mark_converged("ground", r.ground.converged);
    run.mark_converged("excited", r.excited.converged);
    println!("E0 = {:.15}\nE1 = {:.15}\ngap = {:.15}", r.e0, r.e1, r.gap);
    if r.degenerate {
        warn!("the two lowest levels are degenerate within tolerance");
    }
    let summary = json!({ "g": g, "E0": r.e0, "E1": r.e1, "gap": r.gap, "overlap": r.overlap, "degenerate": r.degenerate });
    run.finish(cfg.resolved(), threads, summary)?;
    Ok(())
}

fn cmd_quench(cfg: &RunConfig, oracle: bool, checkpoint_every: usize, threads: usize) -> Result<()> {
    let protocol = cfg.quench_protocol()?;
    let settings = cfg.quench_settings();
    let chi = if settings.exact { 1usize << (protocol.geometry.n_sites() / 2).min(30) } else { cfg.chi_max };
    check_memory(cfg, chi)?;
    let mut run = RunDir::create(&cfg.resolved_output_dir(), "quench")?;
    let resume = run.read_checkpoint()?;
    if let Some(p) = &resume {
        info!("resuming from checkpoint at t = {}", p.t);
    }
    let mut count = 0usize;
    let mut hook = |t: f64, state: &quench2d::mps::Mps<quench2d::C64>, series: &ObservableSeries| -> Result<()> {
        count += 1;
        if checkpoint_every > 0 && count.is_multiple_of(checkpoint_every) {
            run.write_checkpoint(&ResumePoint { state: state.clone(), t, series: series.clone() })?;
        }
        Ok(())
    };
    let (series, _) = run_quench(&protocol, &settings, resume, Some(&mut hook))?;
    run.write_series(&series)?;
    let stopped = series.stopped_at;
    run.mark_converged("tdvp", stopped.is_none());
    let mut summary = json!({
        "tq": series.tq,
        "stopped_at": stopped,
        "central_eps_at_tq": series.central_mean(series.tq, &protocol.geometry),
    });
    if oracle {
        let exact = run_quench_oracle(&protocol, cfg.dt, cfg.oracle_dt_micro)?;
        let report = deviation_report(&series, &exact);
        run.write_numeric("oracle_deviation.csv", &report.table, "mps-vs-oracle")?;
        summary["oracle_max_deviation"] = json!(report.max);
        println!("max deviation from oracle: {:.3e}", report.max);
    }
    run.finish(cfg.resolved(), threads, summary)?;
    if let Some(t) = stopped {
        return Err(Error::NotConverged(format!("bond dimension cap reached at t = {t}; partial results written")));
    }
    Ok(())
}

struct Deviation {
    table: NumericTable,
    max: f64,
}

fn deviation_report(mps: &ObservableSeries, exact: &ObservableSeries) -> Deviation {
    let mut table = NumericTable::new(&["t", "dE", "dEpsLocalMax", "dCxMax", "dSvnMax"]);
    let mut max = 0.0f64;
    for (a, b) in mps.energy.iter().zip(&exact.energy) {
        let t = a.t;
        let max_abs = |xs: Vec<f64>| xs.into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let local = max_abs(mps.local_at(t).iter().zip(exact.local_at(t)).map(|(p, q)| p.eps - q.eps).collect());
        let corr = max_abs(mps.correlations_at(t).iter().zip(exact.correlations_at(t)).map(|(p, q)| p.cx - q.cx).collect());
        let ent = max_abs(mps.entropy_at(t).iter().zip(exact.entropy_at(t)).map(|(p, q)| p.svn - q.svn).collect());
        let de = (a.energy - b.energy).abs();
        max = max.max(de).max(local).max(corr).max(ent);
        let _ = table.push(vec![t, de, local, corr, ent]);
    }
    Deviation { table, max }
}

fn cmd_lightcone(cfg: &RunConfig, threads: usize) -> Result<()> {
    check_memory(cfg, cfg.chi_max)?;
    let geom = cfg.geometry()?;
    let g = cfg.light_g.unwrap_or_else(|| cfg.gc());
    let settings = LightConeSettings {
        dmrg: cfg.dmrg_settings(),
        tdvp: cfg.tdvp_settings(),
        t_max: cfg.light_t_max,
        measure_every: cfg.light_measure_every,
        threshold: cfg.light_threshold,
        kick: cfg.light_kick,
    };
    let site = (geom.center_col(), 0);
    let cone = light_cone_experiment(&geom, g, cfg.j, site, Some(cfg.light_kick), &settings)?;
    let mut run = RunDir::create(&cfg.resolved_output_dir(), "lightcone")?;
    let mut table = NumericTable::new(&["t", "x", "dSvn"]);
    for (t, row) in cone.times.iter().zip(&cone.entropy) {
        for (x, s) in cone.x.iter().zip(row) {
            table.push(vec![*t, *x, *s])?;
        }
    }
    run.write_numeric("lightcone.csv", &table, "mps")?;
    run.mark_converged("front", cone.velocity.is_some());
    let summary = match &cone.velocity {
        Some(v) => {
            println!("c = {:.6} +- {:.6}", v.c, v.uncertainty);
            json!({ "g": g, "c": v.c, "uncertainty": v.uncertainty, "front_points": v.front.len() })
        }
        None => json!({ "g": g, "c": null }),
    };
    run.finish(cfg.resolved(), threads, summary)?;
    if cone.velocity.is_none() {
        return Err(Error::NoFront("entropy never crossed the threshold on enough time slices".into()));
    }
    Ok(())
}

fn cmd_heatwave(cfg: &RunConfig, c: f64, mass: f64, v: Option<f64>, points: usize, threads: usize) -> Result<()> {
    let v = v.unwrap_or(if cfg.v > c { cfg.v } else { 2.0 * c });
    let mut params = HeatwaveParams::new(c, v, mass);
    params.tau = cfg.tau;
    params.validate()?;
    if !v.is_finite() {
        return Err(Error::Config("heatwave profile needs a finite front velocity".into()));
    }
    let reach = cfg.geometry()?.max_abs_x();
    let tq = reach / v;
    let n = points.max(2);
    let x_grid: Vec<f64> = (0..n).map(|i| -reach + 2.0 * reach * i as f64 / (n - 1) as f64).collect();
    let (profile, total) = spatial_energy_profile(&x_grid, tq, &params, EventGrid::default())?;
    let run = RunDir::create(&cfg.resolved_output_dir(), "heatwave")?;
    let mut table = NumericTable::new(&["x", "eps"]);
    for (x, e) in profile.x.iter().zip(&profile.eps) {
        table.push(vec![*x, *e])?;
    }
    run.write_numeric("heatwave_profile.csv", &table, "theory")?;
    let velocities = [1.25 * c, 1.5 * c, 2.0 * c, 3.0 * c, 5.0 * c, f64::INFINITY];
    let width = cfg.ly as f64;
    let totals = total_energy_vs_velocity(&velocities, &params, width, Some(width))?;
    let mut vt = NumericTable::new(&["v", "epsRegion"]);
    for (v, e) in &totals {
        vt.push(vec![*v, *e])?;
    }
    run.write_numeric("heatwave_velocity.csv", &vt, "theory")?;
    let hot = profile.hot_value();
    let cold = profile.cold_value();
    println!("tq = {tq:.6} total = {total:.6e} hot = {hot:?} cold = {cold:?}");
    let summary = json!({ "tq": tq, "total": total, "hot": hot, "cold": cold });
    run.finish(cfg.resolved(), threads, summary)?;
    Ok(())
}

fn cmd_collapse(cfg: &RunConfig, kind: CollapseKind, input: &PathBuf, threads: usize) -> Result<()> {
    let name = input.display().to_string();
    let (table, _) = NumericTable::read(BufReader::new(File::open(input)?), &name)?;
    let col = |k: &str| table.column(k).ok_or_else(|| Error::Config(format!("{name}: missing column {k}")));
    let mut run = RunDir::create(&cfg.resolved_output_dir(), "collapse")?;
    let summary = match kind {
        CollapseKind::Gap => {
            let (ly, g, gap) = (col("Ly")?, col("g")?, col("gap")?);
            let data: Vec<GapPoint> =
                ly.iter().zip(&g).zip(&gap).map(|((l, g), d)| GapPoint { ly: *l as usize, g: *g, gap: *d }).collect();
            let fit = fit_gap_collapse(&data, CRITICAL.z, (CRITICAL.gc_inf, CRITICAL.nu))?;
            println!("gc = {:.6} nu = {:.6} residual = {:.3e}", fit.gc, fit.nu, fit.residual);
            json!({ "gc": fit.gc, "nu": fit.nu, "residual": fit.residual })
        }
        CollapseKind::Correlation => {
            let (ly, r, cx) = (col("Ly")?, col("r")?, col("cx")?);
            let data: Vec<CorrelationPoint> =
                ly.iter().zip(&r).zip(&cx).map(|((l, r), c)| CorrelationPoint { ly: *l as usize, r: *r, cx: *c }).collect();
            let (two_delta, residual) = scan_two_delta(&data, 0.5, 2.0)?;
            println!("2Delta = {two_delta:.6} residual = {residual:.3e}");
            json!({ "two_delta": two_delta, "residual": residual })
        }
    };
    run.mark_converged("fit", true);
    run.finish(cfg.resolved(), threads, summary)?;
    Ok(())
}

fn cmd_oracle_check(cfg: &RunConfig, tolerance: f64, threads: usize) -> Result<()> {
    let geom = cfg.geometry()?;
    check_size(geom.n_sites())?;
    let g = cfg.gc();
    let fields = uniform_fields(&geom, g);
    let exact = dense_spectrum(&tfi_hamiltonian(&geom, &fields, cfg.j)?, 2)?;
    let mpo = hamiltonian_mpo::<f64>(&geom, &fields, cfg.j)?;
    let r = energy_gap(&mpo, &cfg.dmrg_settings())?;
    let e0_err = (r.e0 - exact.values[0]).abs() / exact.values[0].abs();
    let gap_err = (r.gap - (exact.values[1] - exact.values[0])).abs();
    println!("E0 relative error = {e0_err:.3e}, gap error = {gap_err:.3e}");

    let protocol = cfg.quench_protocol()?;
    let mut settings = cfg.quench_settings();
    settings.exact = true;
    let (series, _) = run_quench(&protocol, &settings, None, None)?;
    let reference = run_quench_oracle(&protocol, cfg.dt, cfg.oracle_dt_micro)?;
    let report = deviation_report(&series, &reference);
    println!("quench max deviation = {:.3e}", report.max);

    let mut run = RunDir::create(&cfg.resolved_output_dir(), "oracle-check")?;
    run.write_numeric("oracle_deviation.csv", &report.table, "mps-vs-oracle")?;
    let ok = e0_err < 1e-8 && gap_err < tolerance && report.max < tolerance;
    run.mark_converged("oracle", ok);
    let summary = json!({ "e0_rel_err": e0_err, "gap_err": gap_err, "quench_max_dev": report.max, "pass": ok });
    run.finish(cfg.resolved(), threads, summary)?;
    if ok {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(Error::NotConverged(format!("oracle deviation above tolerance {tolerance:.1e}")))
    }
}
