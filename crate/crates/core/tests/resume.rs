use quench2d::lattice::{LatticeGeometry, ModelParams};
use quench2d::mps::Mps;
use quench2d::quench::{run_quench, ObservableSeries, QuenchProtocol, QuenchSettings, ResumePoint, StateHook};
use quench2d::store::RunDir;
use quench2d::{Error, C64};

fn max_dev(a: &ObservableSeries, b: &ObservableSeries) -> f64 {
    assert_eq!(a.energy.len(), b.energy.len());
    assert_eq!(a.local.len(), b.local.len());
    assert_eq!(a.entropy.len(), b.entropy.len());
    assert_eq!(a.correlations.len(), b.correlations.len());
    let e = a.energy.iter().zip(&b.energy).map(|(p, q)| (p.energy - q.energy).abs().max((p.eps - q.eps).abs()));
    let l = a.local.iter().zip(&b.local).map(|(p, q)| (p.eps - q.eps).abs());
    let s = a.entropy.iter().zip(&b.entropy).map(|(p, q)| (p.svn - q.svn).abs());
    let c = a.correlations.iter().zip(&b.correlations).map(|(p, q)| (p.cx - q.cx).abs());
    e.chain(l).chain(s).chain(c).fold(0.0, f64::max)
}

#[test]
fn resumed_run_reproduces_uninterrupted_trajectory() {
    let geom = LatticeGeometry::cylinder(6, 2).unwrap();
    let mut protocol = QuenchProtocol::new(geom, ModelParams::standard(2.0859, 3.0, 0.4));
    protocol.local_every = 3;
    let settings = QuenchSettings::default();
    let (full, _) = run_quench(&protocol, &settings, None, None).unwrap();

    let dir = tempfile::tempdir().unwrap();
    {
        let run = RunDir::create(dir.path(), "quench").unwrap();
        let mut calls = 0;
        let mut hook = |t: f64, state: &Mps<C64>, series: &ObservableSeries| -> quench2d::Result<()> {
            calls += 1;
            if calls == 9 {
                run.write_checkpoint(&ResumePoint { state: state.clone(), t, series: series.clone() })?;
                return Err(Error::Resource("interrupted".into()));
            }
            Ok(())
        };
        let hook: &mut StateHook = &mut hook;
        assert!(run_quench(&protocol, &settings, None, Some(hook)).is_err());
    }
    let run = RunDir::create(dir.path(), "quench").unwrap();
    let point = run.read_checkpoint().unwrap().expect("checkpoint present");
    assert!(point.t > protocol.t0() && point.t < full.tq);
    let (resumed, _) = run_quench(&protocol, &settings, Some(point), None).unwrap();
    let dev = max_dev(&full, &resumed);
    assert!(dev < 1e-8, "deviation {dev:e}");
}
