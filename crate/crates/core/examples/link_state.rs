//! Link-state routing: per-router Dijkstra over the flooded map, the tables
//! it yields, and what the flood costs.

use reachsim::deterministic::{link_state_partial, run_link_state};
use reachsim::topology::{generate, GeneratorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = generate(&GeneratorSpec::RandomConnected { n: 8, edge_prob: 0.3, cost_min: 1, cost_max: 9, seed: 3 })?;
    let run = run_link_state(&t)?;
    println!(
        "{} routers, {} links: {} link-state messages, {} link traversals, {} payload units",
        t.router_count(),
        t.link_count(),
        run.message_count,
        run.flood_link_traversals,
        run.payload_units
    );
    for r in t.routers() {
        let row: Vec<String> = t
            .routers()
            .map(|d| match run.tables[r.0].get(d) {
                Some(e) => format!("{}/{}", e.cost, t.port(r, e.interface).name),
                None => "-".into(),
            })
            .collect();
        println!("router {}: {}", t.label(r), row.join("  "));
    }

    // Before the flood has spread, routers only know their neighbourhood.
    for horizon in 0..=t.diameter()? {
        let known: usize = link_state_partial(&t, horizon).iter().map(|tb| tb.entries.iter().flatten().count()).sum();
        println!("horizon {horizon}: {known} routes known");
    }
    Ok(())
}
