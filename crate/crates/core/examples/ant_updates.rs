//! The ant probability update, one forward ant walking a chain with
//! backward learning, and a backward ant replaying its stack.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reachsim::rl::{
    ant_prob_update, process_backward_ant, process_forward_ant, Ant, AntAction, AntLearning, AntMode, CostFunction,
};
use reachsim::tables::ProbTables;
use reachsim::topology::{generate, GeneratorSpec};
use reachsim::RouterId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let row = [0.5, 0.5];
    for delta in [0.0, 0.5, 2.0, f64::INFINITY] {
        println!("reinforce interface 0 of {row:?} by {delta}: {:?}", ant_prob_update(&row, 0, delta)?);
    }

    let t = generate(&GeneratorSpec::Complete(4))?;
    let mut tables = ProbTables::init_uniform(&t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let learning = AntLearning::default();
    let mut ant = Ant::new(RouterId(0), RouterId(3), AntMode::Uniform, 16, true);
    let (mut at, mut arrival) = (RouterId(0), None);
    loop {
        let step = process_forward_ant(&t, &mut tables, at, &mut ant, arrival, &learning, &mut rng)?;
        if let Some(u) = step.update {
            println!("at {}: row for {} gets +{:.3} on interface {}", u.router.0, u.row_destination.0, u.delta, u.interface);
        }
        match step.action {
            AntAction::Forward(i) => {
                let port = t.port(at, i);
                println!("{} -> {}", at.0, port.neighbor.0);
                (at, arrival) = (port.neighbor, Some(port.peer));
            }
            AntAction::Delivered => break,
            AntAction::Discarded => {
                println!("ant discarded");
                return Ok(());
            }
        }
    }
    println!("delivered with reverse cost {} and forward cost {}", ant.cost, ant.forward_cost);
    match process_backward_ant(&t, &mut tables, &ant, &CostFunction::default())? {
        reachsim::rl::BackwardOutcome::Applied(ups) => {
            for u in ups {
                println!("backward: router {} row {} interface {} +{:.3}", u.router.0, u.row_destination.0, u.interface, u.delta);
            }
        }
        reachsim::rl::BackwardOutcome::Discarded => println!("backward ant dropped: the walk had a cycle"),
    }
    print!("{}", tables.dump(&t));
    Ok(())
}
