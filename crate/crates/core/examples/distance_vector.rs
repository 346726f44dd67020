//! Distance-vector rounds from a cold start, then the count-to-infinity
//! that follows when the end of a chain disappears.

use reachsim::deterministic::{round_trace_csv, run_distance_vector, simulate_count_to_infinity, DEFAULT_INFINITY};
use reachsim::topology::{generate, GeneratorSpec};
use reachsim::RouterId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = generate(&GeneratorSpec::LinearChain(4))?;
    let run = run_distance_vector(&t, DEFAULT_INFINITY, 32);
    println!("converged={} after {} rounds, {} messages per round", run.converged, run.rounds_used, run.per_round_messages[0]);
    print!("{}", round_trace_csv(&t, &run.history));

    let removed = RouterId(3);
    let trace = simulate_count_to_infinity(&t, removed, DEFAULT_INFINITY)?;
    println!("\nafter removing router {}:", t.label(removed));
    println!("round  A   B   C");
    for row in &trace.rows {
        println!("{:>5} {:>3} {:>3} {:>3}", row.round, row.costs[0], row.costs[1], row.costs[2]);
    }
    Ok(())
}
