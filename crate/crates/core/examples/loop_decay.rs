//! Packets caught in a routing loop leave it geometrically fast when every
//! router on the loop offers an exit. A five-router ring where each router
//! sends to a sink with probability q and clockwise otherwise.

use reachsim::metrics::{geometric_envelope, survival_curve};
use reachsim::sim::{run_scenario, ProtocolKind, ScenarioConfig, TopologySource};
use reachsim::tables::{ProbRow, ProbTables};
use reachsim::topology::load_topology;
use reachsim::RouterId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = 0.2;
    let mut text: String = (0..6).map(|r| format!("node {r}\n")).collect();
    for r in 0..5 {
        text += &format!("link {r}:cw {}:ccw 1 1\nlink {r}:exit 5:r{r} 1 1\n", (r + 1) % 5);
    }
    let t = load_topology(&text)?;
    let mut tables = ProbTables::init_uniform(&t)?;
    for r in (0..5).map(RouterId) {
        let mut p = vec![0.0; t.degree(r)];
        p[t.interface_by_name(r, "cw").unwrap()] = 1.0 - q;
        p[t.interface_by_name(r, "exit").unwrap()] = q;
        tables.set_row(r, RouterId(5), Some(ProbRow::new(p)?));
    }
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("ring.tables");
    std::fs::write(&path, tables.dump(&t))?;

    let mut cfg = ScenarioConfig { topology: TopologySource::Given(t), protocol: ProtocolKind::Static, ..ScenarioConfig::default() };
    cfg.static_tables = Some(path);
    cfg.data.pairs = (0..5).map(|r| (r, 5, 0.1)).collect();
    cfg.data.max_packets = Some(20_000);
    cfg.data.hop_budget = 1_000;
    cfg.duration_ms = 1e7;
    let out = run_scenario(cfg)?;
    let hops: Vec<Option<usize>> = out.engine.finished_packets().iter().map(|f| f.hops_to_delivery()).collect();
    let curve = survival_curve(&hops, 30);
    println!("hops  survived  (1-q)^n");
    for n in (0..=30).step_by(5) {
        println!("{n:>4}  {:.5}   {:.5}", curve[n], geometric_envelope(q, 1, n));
    }
    let s = &out.report.loop_stats;
    println!("{} packets looped, {:.2} extra hops on average", s.packets_in_loop, s.mean_extra_hops);
    Ok(())
}
