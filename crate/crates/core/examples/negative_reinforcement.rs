//! Negative reinforcement: an ant that hits a dead end or loops tells the
//! previous router to stop using that hop. How much context qualifies the
//! zeroed row decides whether a still-useful hop gets cut.

use reachsim::rl::{is_false_negative, negative_reinforce, NegMasks, NegQualifier, NegSignal};
use reachsim::tables::ProbTables;
use reachsim::topology::{generate, GeneratorSpec};
use reachsim::RouterId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for spec in [GeneratorSpec::NegReinfLeft, GeneratorSpec::NegReinfMiddle, GeneratorSpec::NegReinfRight] {
        let t = generate(&spec)?;
        let iface = |r: usize, name: &str| t.interface_by_name(RouterId(r), name).unwrap();
        let signal = if spec == GeneratorSpec::NegReinfLeft {
            // An A -> B ant stepped into the leaf C.
            NegSignal { router: RouterId(0), interface: iface(0, "i2"), source: RouterId(0), destination: RouterId(1), arrival: None }
        } else {
            // An A -> E ant went B, D, C and came back to B.
            NegSignal {
                router: RouterId(2),
                interface: iface(2, "i3"),
                source: RouterId(0),
                destination: RouterId(4),
                arrival: Some(iface(2, "i1")),
            }
        };
        print!("{spec:<18}");
        let base = ProbTables::init_uniform(&t)?;
        for level in NegQualifier::ALL {
            let mut masks = NegMasks::new(level);
            let row = negative_reinforce(&mut masks, &base, &signal)?;
            let verdict = if is_false_negative(&t, level, &signal) { "cuts a live path" } else { "safe" };
            print!("  {level:?}: {verdict} {:?}", row.as_slice());
        }
        println!();
    }
    Ok(())
}
