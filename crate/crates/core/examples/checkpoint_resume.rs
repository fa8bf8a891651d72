//! Interrupt a quench after a checkpoint and resume it; the resumed run
//! reproduces the uninterrupted trajectory.

use quench2d::lattice::{LatticeGeometry, ModelParams};
use quench2d::mps::Mps;
use quench2d::quench::{run_quench, ObservableSeries, QuenchProtocol, QuenchSettings, StateHook};
use quench2d::store::RunDir;
use quench2d::{Error, C64};

fn main() -> quench2d::Result<()> {
    let dir = tempfile::tempdir()?;
    let geom = LatticeGeometry::cylinder(6, 2)?;
    let protocol = QuenchProtocol::new(geom, ModelParams::standard(2.0859, 3.0, 0.4));
    let settings = QuenchSettings::default();
    let (full, _) = run_quench(&protocol, &settings, None, None)?;

    {
        let run = RunDir::create(dir.path(), "quench")?;
        let mut calls = 0;
        let mut hook = |t: f64, state: &Mps<C64>, series: &ObservableSeries| -> quench2d::Result<()> {
            calls += 1;
            if calls == 15 {
                run.write_checkpoint(&quench2d::quench::ResumePoint { state: state.clone(), t, series: series.clone() })?;
                return Err(Error::Resource("simulated interruption".into()));
            }
            Ok(())
        };
        let hook: &mut StateHook = &mut hook;
        let err = run_quench(&protocol, &settings, None, Some(hook)).unwrap_err();
        println!("first attempt stopped: {err}");
    }

    let run = RunDir::create(dir.path(), "quench")?;
    let resume = run.read_checkpoint()?.expect("checkpoint written");
    println!("resuming at t = {:.3}", resume.t);
    let (resumed, _) = run_quench(&protocol, &settings, Some(resume), None)?;
    let worst = full.energy.iter().zip(&resumed.energy).map(|(a, b)| (a.eps - b.eps).abs()).fold(0.0, f64::max);
    println!("{} energy rows, max deviation from the uninterrupted run {worst:.1e}", resumed.energy.len());
    Ok(())
}
