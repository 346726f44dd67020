//! Scenarios as text: parse a config, apply overrides the way the CLI's
//! `--set` does, run it and write the report files.

use reachsim::sim::{run_scenario, ScenarioConfig};

const SCENARIO: &str = "
# ring with a mix of ants and light data traffic
topology.spec = ring:6
protocol = ants
duration_ms = 3000
ants.uniform_fraction = 0.2
data.rate = 0.002
snapshot_ms = 500
metrics.split_hop = 0>1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::from_text(SCENARIO)?;
    for kv in std::env::args().skip(1) {
        let (k, v) = kv.split_once('=').ok_or("overrides look like key=value")?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    let out = run_scenario(cfg)?;
    let dir = tempfile::tempdir()?;
    std::fs::write(dir.path().join("report.json"), out.report.to_json())?;
    std::fs::write(dir.path().join("tables.dump"), &out.tables_dump)?;
    print!("{}", out.report.to_csv());
    println!("event log {}", out.event_log_hash);
    Ok(())
}
