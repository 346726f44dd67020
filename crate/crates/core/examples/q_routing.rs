//! Q-routing on two disjoint paths. Estimates only change for interfaces that
//! carry traffic, so after the alternate path improves its entry stays stale
//! until queueing noise on the favourite happens to push traffic across.

use reachsim::sim::{run_scenario, ChangeKind, ProtocolKind, ScenarioConfig, TopologyChange, TopologySource};
use reachsim::topology::load_topology;
use reachsim::{Cost, RouterId};

const TOPOLOGY: &str = "node 0\nnode 1\nnode 2\nnode 3\n\
link 0:i1 1:i1 5 5\nlink 1:i2 3:i1 5 5\nlink 0:i2 2:i1 7 7\nlink 2:i2 3:i2 7 7\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let three = Cost::from_int(3);
    let mut cfg = ScenarioConfig {
        topology: TopologySource::Given(load_topology(TOPOLOGY)?),
        protocol: ProtocolKind::QRouting,
        ..ScenarioConfig::default()
    };
    cfg.data.pairs = vec![(0, 3, 0.005)];
    cfg.changes = [(0, 2), (2, 3)]
        .into_iter()
        .map(|(a, b)| TopologyChange { at_ms: 5_000.0, kind: ChangeKind::SetLinkCost { a, b, cost_ab: three, cost_ba: three } })
        .collect();
    for duration in [5_000.0, 50_000.0] {
        cfg.duration_ms = duration;
        let out = run_scenario(cfg.clone())?;
        let q = out.engine.q_table().expect("q-routing run");
        let via_two = out.engine.finished_packets().iter().filter(|f| f.trace.get(1) == Some(&RouterId(2))).count();
        println!(
            "t={duration:>6} ms  Q(0 -> 3) = {:.2?}  packets {}  first hop via router 2: {via_two}",
            q.row(RouterId(0), RouterId(3)),
            out.report.packets.delivered,
        );
    }
    Ok(())
}
