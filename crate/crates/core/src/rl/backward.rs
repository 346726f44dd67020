use serde::Serialize;

use super::{apply_ant_update, Ant, CostFunction, ReinforcementUpdate, RlError};
use crate::tables::ProbTables;
use crate::topology::Topology;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum BackwardOutcome {
    /// Updates in the order the backward ant applied them (destination side
    /// first).
    Applied(Vec<ReinforcementUpdate>),
    /// The forward ant revisited a router; nothing was reinforced.
    Discarded,
}

/// Replays a forward ant's stack in reverse once it has reached its
/// destination, reinforcing at every visited router the interface the ant
/// chose, in the row for the ant's destination. The reinforcement uses the
/// cost-to-go from that router, measured in the direction of travel.
pub fn process_backward_ant(
    t: &Topology,
    tables: &mut ProbTables,
    ant: &Ant,
    cost_function: &CostFunction,
) -> Result<BackwardOutcome, RlError> {
    let stack = ant.stack.as_deref().ok_or(RlError::MalformedStack("ant carries no stack"))?;
    let first = stack.first().ok_or(RlError::MalformedStack("empty stack"))?;
    if first.router != ant.source {
        return Err(RlError::MalformedStack("stack does not start at the source"));
    }
    for (k, e) in stack.iter().enumerate() {
        if e.chosen >= t.degree(e.router) {
            return Err(RlError::MalformedStack("interface out of range"));
        }
        let next = stack.get(k + 1).map_or(ant.destination, |n| n.router);
        if t.port(e.router, e.chosen).neighbor != next {
            return Err(RlError::MalformedStack("consecutive entries are not linked"));
        }
        if e.cost_at_node > ant.forward_cost || stack.get(k + 1).is_some_and(|n| n.cost_at_node < e.cost_at_node) {
            return Err(RlError::MalformedStack("recorded costs decrease"));
        }
    }
    let mut seen = vec![false; t.router_count()];
    seen[ant.destination.0] = true;
    for e in stack {
        if std::mem::replace(&mut seen[e.router.0], true) {
            return Ok(BackwardOutcome::Discarded);
        }
    }
    let mut updates = Vec::with_capacity(stack.len());
    for e in stack.iter().rev() {
        let to_go = ant.forward_cost - e.cost_at_node;
        let delta = cost_function.delta(to_go);
        let row = tables
            .row_mut(e.router, ant.destination)
            .ok_or(RlError::MalformedStack("no row for the destination"))?;
        apply_ant_update(row, e.chosen, delta)?;
        updates.push(ReinforcementUpdate { router: e.router, row_destination: ant.destination, interface: e.chosen, delta });
    }
    Ok(BackwardOutcome::Applied(updates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Cost;
    use crate::rl::{AntMode, StackEntry};
    use crate::topology::{generate, GeneratorSpec, RouterId};

    fn entry(r: usize, c: u64, chosen: usize) -> StackEntry {
        StackEntry { router: RouterId(r), cost_at_node: Cost::from_int(c), arrived_on: None, chosen }
    }

    fn ant(src: usize, dst: usize, cost: u64, stack: Vec<StackEntry>) -> Ant {
        let mut a = Ant::new(RouterId(src), RouterId(dst), AntMode::Regular, 10, true);
        a.forward_cost = Cost::from_int(cost);
        a.stack = Some(stack);
        a
    }

    #[test]
    fn chain_of_three_updates_b_then_a() {
        let t = generate(&GeneratorSpec::LinearChain(3)).unwrap();
        let mut tables = ProbTables::init_uniform(&t).unwrap();
        // B's ports: 0 towards A, 1 towards C.
        let a = ant(0, 2, 2, vec![entry(0, 0, 0), entry(1, 1, 1)]);
        let out = process_backward_ant(&t, &mut tables, &a, &CostFunction::default()).unwrap();
        let BackwardOutcome::Applied(ups) = out else { panic!() };
        assert_eq!(ups.len(), 2);
        assert_eq!((ups[0].router, ups[0].interface), (RouterId(1), 1));
        assert_eq!((ups[1].router, ups[1].interface), (RouterId(0), 0));
        // Cost-to-go 1 at B, 2 at A under f(c) = c + 1.
        assert_eq!(ups[0].delta, 0.5);
        assert_eq!(ups[1].delta, 1.0 / 3.0);
        let b = tables.row(RouterId(1), RouterId(2)).unwrap();
        assert!((b.get(1) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_discards_without_updates() {
        let t = generate(&GeneratorSpec::Complete(3)).unwrap();
        let mut tables = ProbTables::init_uniform(&t).unwrap();
        let before = tables.clone();
        // 0 -> 1 -> 0 -> 2
        let a = ant(0, 2, 3, vec![entry(0, 0, 0), entry(1, 1, 0), entry(0, 2, 1)]);
        let out = process_backward_ant(&t, &mut tables, &a, &CostFunction::default()).unwrap();
        assert_eq!(out, BackwardOutcome::Discarded);
        assert_eq!(tables, before);
    }

    #[test]
    fn single_hop_updates_source_once() {
        let t = generate(&GeneratorSpec::LinearChain(2)).unwrap();
        let mut tables = ProbTables::init_uniform(&t).unwrap();
        let a = ant(0, 1, 1, vec![entry(0, 0, 0)]);
        let BackwardOutcome::Applied(ups) =
            process_backward_ant(&t, &mut tables, &a, &CostFunction::default()).unwrap()
        else {
            panic!()
        };
        assert_eq!(ups.len(), 1);
        assert_eq!(ups[0].router, RouterId(0));
    }

    #[test]
    fn malformed_stacks_are_errors() {
        let t = generate(&GeneratorSpec::LinearChain(3)).unwrap();
        let mut tables = ProbTables::init_uniform(&t).unwrap();
        let cf = CostFunction::default();
        assert!(process_backward_ant(&t, &mut tables, &ant(0, 2, 2, vec![]), &cf).is_err());
        // B's interface 0 leads back to A, not to C.
        let broken = ant(0, 2, 2, vec![entry(0, 0, 0), entry(1, 1, 0)]);
        assert!(matches!(process_backward_ant(&t, &mut tables, &broken, &cf), Err(RlError::MalformedStack(_))));
        let mut no_stack = ant(0, 2, 2, vec![]);
        no_stack.stack = None;
        assert!(process_backward_ant(&t, &mut tables, &no_stack, &cf).is_err());
    }
}
