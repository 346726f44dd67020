//! Path vectors carry the routers they traverse, so a withdrawn destination
//! disappears without counting. Compare with distance-vector on the same
//! failure.

use reachsim::deterministic::{run_path_vector, simulate_count_to_infinity, simulate_path_vector_withdrawal, DEFAULT_INFINITY};
use reachsim::topology::{generate, GeneratorSpec};
use reachsim::RouterId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = generate(&GeneratorSpec::Ring(6))?;
    let run = run_path_vector(&t, 16)?;
    println!("ring(6): path-vector converged in {} rounds", run.rounds_used);
    for pv in &run.tables[0].lists[3] {
        let hops: Vec<String> = pv.routers.iter().map(|&r| t.label(r).to_string()).collect();
        println!("  0 -> 3 via [{}] cost {}", hops.join(" "), pv.cost);
    }

    let chain = generate(&GeneratorSpec::LinearChain(4))?;
    let d = RouterId(3);
    let dv = simulate_count_to_infinity(&chain, d, DEFAULT_INFINITY)?;
    let pv = simulate_path_vector_withdrawal(&chain, d, DEFAULT_INFINITY)?;
    println!("\nchain(4) loses its last router:");
    println!("  distance-vector needs {} rounds to give up", dv.rows.len());
    println!("  path-vector needs {} rounds", pv.rows.len());
    for row in &pv.rows {
        println!("    round {}: {:?}", row.round, row.costs.iter().map(ToString::to_string).collect::<Vec<_>>());
    }
    Ok(())
}
