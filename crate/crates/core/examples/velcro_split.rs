//! Traffic split on a velcro topology: a direct link next to a chain of
//! looped sections of the same shortest cost. The mix of regular
//! (table-following) and uniform (random) ants decides how data divides.
//!
//!     cargo run --release --example velcro_split

use reachsim::metrics::split_ratio;
use reachsim::sim::{run_scenario, ProtocolKind, ScenarioConfig, TopologySource};
use reachsim::topology::GeneratorSpec;
use reachsim::{Cost, RouterId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GeneratorSpec::Velcro { direct_cost: Cost::from_int(10), sections: 5, section_cost: Cost::from_int(2) };
    println!("uniform share  direct:loopy (first hop)  delivered via direct link");
    for mix in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mut cfg = ScenarioConfig { topology: TopologySource::Spec(spec.clone()), protocol: ProtocolKind::Ants, ..ScenarioConfig::default() };
        cfg.ants.uniform_fraction = mix;
        cfg.ants.share_fifo = false;
        cfg.ants.stop_ms = Some(20_000.0);
        cfg.data.pairs = vec![(0, 1, 0.1)];
        cfg.data.start_ms = 20_000.0;
        cfg.data.hop_budget = 200;
        cfg.metrics.split_hop = Some((0, 1));
        cfg.duration_ms = 40_000.0;
        let out = run_scenario(cfg)?;
        let delivered: Vec<&[RouterId]> =
            out.engine.finished_packets().iter().filter(|f| f.delivered).map(|f| f.trace.as_slice()).collect();
        let first = split_ratio(delivered, |tr: &[RouterId]| tr.get(1) == Some(&RouterId(1)));
        let used = out.report.split.expect("split hop configured");
        println!("{mix:>13}  {:>6}:{:<6}                {:.3}", first.group_a, first.group_b, used.share_a().unwrap_or(f64::NAN));
    }
    Ok(())
}
