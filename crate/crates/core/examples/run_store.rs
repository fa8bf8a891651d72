//! Config parsing, CSV tables and the checksummed run manifest.

use quench2d::store::{read_table, verify_manifest, EnergyRow, RunConfig, RunDir};

fn main() -> quench2d::Result<()> {
    let mut cfg = RunConfig::from_text("geometry.Ly = 3\nquench.v = 2.5\n")?;
    cfg.apply_overrides(&["mps.chiMax=64"])?;
    println!("{}", cfg.to_text());
    if let Err(e) = RunConfig::from_text("quench.speed = 2") {
        println!("rejected: {e}");
    }

    let dir = tempfile::tempdir()?;
    let mut run = RunDir::create(dir.path(), "demo")?;
    let rows: Vec<EnergyRow> =
        (0..5).map(|i| EnergyRow { t: 0.1 * i as f64, energy: -1.0 + 0.01 * i as f64, e0: -1.0, eps: 0.01 * i as f64 }).collect();
    run.write_table(&rows, "demo")?;
    run.mark_converged("demo", true);
    let manifest = run.finish(cfg.resolved(), 1, serde_json::json!({ "rows": rows.len() }))?;
    for f in &manifest.files {
        println!("{} {} bytes sha256 {}", f.name, f.bytes, f.sha256);
    }
    verify_manifest(dir.path())?;
    let (back, source): (Vec<EnergyRow>, String) = read_table(std::fs::File::open(dir.path().join("energy.csv"))?)?;
    println!("read {} rows back from source '{source}', identical: {}", back.len(), back == rows);
    print!("{}", std::fs::read_to_string(dir.path().join("energy.csv"))?);
    Ok(())
}
