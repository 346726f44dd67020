//! Anytime operation: soft-reachability coverage of the routing tables
//! sampled while protocols run. Constructive protocols start from nothing
//! and build up; ants start from full coverage and prune.

use reachsim::sim::{run_scenario, ProtocolKind, ScenarioConfig, TopologySource};
use reachsim::topology::GeneratorSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GeneratorSpec::RandomConnected { n: 9, edge_prob: 0.35, cost_min: 1, cost_max: 5, seed: 11 };
    for (protocol, mix) in [
        (ProtocolKind::DistanceVector, 0.0),
        (ProtocolKind::LinkState, 0.0),
        (ProtocolKind::Ants, 0.0),
        (ProtocolKind::Ants, 1.0),
    ] {
        let mut cfg = ScenarioConfig { topology: TopologySource::Spec(spec.clone()), protocol, ..ScenarioConfig::default() };
        cfg.ants.uniform_fraction = mix;
        cfg.duration_ms = 2_000.0;
        cfg.snapshot_ms = if protocol.is_deterministic() { 1.0 } else { 250.0 };
        let out = run_scenario(cfg)?;
        let curve: Vec<String> =
            out.report.coverage_curve.iter().take(9).map(|(t, c)| format!("{t:.0}:{c:.2}")).collect();
        let label = if protocol == ProtocolKind::Ants { format!("ants mix={mix}") } else { protocol.name().to_string() };
        println!("{label:<16} {}", curve.join(" "));
    }
    Ok(())
}
