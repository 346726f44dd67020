use std::fmt::Write as _;

use super::{Topology, TopologyError};
use crate::cost::{Cost, CostParseError};

/// Parses the line-oriented topology format:
///
/// ```text
/// # comment
/// node <id>
/// link <a>:<if_a> <b>:<if_b> <cost_ab> <cost_ba>
/// ```
///
/// Nodes must be declared before links reference them.
pub fn load_topology(text: &str) -> Result<Topology, TopologyError> {
    let mut builder = Topology::builder();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let syntax = |message: String| TopologyError::Syntax { line, message };
        match tokens.as_slice() {
            [] => {}
            ["node", id] => {
                let label = parse_id(id).map_err(syntax)?;
                builder.router(label)?;
            }
            ["link", a, b, cost_ab, cost_ba] => {
                let (la, ia) = parse_endpoint(a).map_err(syntax)?;
                let (lb, ib) = parse_endpoint(b).map_err(syntax)?;
                let cab = parse_cost(cost_ab, line)?;
                let cba = parse_cost(cost_ba, line)?;
                builder.link(la, ia, lb, ib, cab, cba).map_err(|e| match e {
                    TopologyError::SelfLoop { label, .. } => TopologyError::SelfLoop { line, label },
                    other => other,
                })?;
            }
            ["node", ..] => return Err(syntax("expected `node <id>`".into())),
            ["link", ..] => {
                return Err(syntax("expected `link <a>:<if> <b>:<if> <cost_ab> <cost_ba>`".into()))
            }
            [other, ..] => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }
    builder.build()
}

fn parse_id(token: &str) -> Result<u32, String> {
    token.parse().map_err(|_| format!("invalid router id `{token}`"))
}

fn parse_endpoint(token: &str) -> Result<(u32, &str), String> {
    let (id, iface) = token
        .split_once(':')
        .ok_or_else(|| format!("expected `<id>:<interface>`, got `{token}`"))?;
    if iface.is_empty() || !iface.bytes().all(|b| b.is_ascii_alphanumeric()) {
        return Err(format!("invalid interface name `{iface}`"));
    }
    Ok((parse_id(id)?, iface))
}

fn parse_cost(token: &str, line: usize) -> Result<Cost, TopologyError> {
    token.parse().map_err(|e| match e {
        CostParseError::Negative(_) => TopologyError::NegativeCost { line },
        other => TopologyError::Syntax { line, message: other.to_string() },
    })
}

/// Inverse of [`load_topology`].
pub fn emit_topology(t: &Topology) -> String {
    let mut out = String::new();
    for r in t.routers() {
        writeln!(out, "node {}", t.label(r)).unwrap();
    }
    for l in t.links() {
        writeln!(
            out,
            "link {}:{} {}:{} {} {}",
            t.label(l.a),
            l.a_interface,
            t.label(l.b),
            l.b_interface,
            l.cost_ab,
            l.cost_ba
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::RouterId;

    #[test]
    fn smallest_valid_file() {
        let t = load_topology("node 0\nnode 1\nlink 0:i1 1:i1 1 1").unwrap();
        assert_eq!(t.router_count(), 2);
        assert_eq!(t.link_count(), 1);
        let l = &t.links()[0];
        assert_eq!((l.cost_ab, l.cost_ba), (Cost::from_int(1), Cost::from_int(1)));
    }

    #[test]
    fn self_loop_rejected_with_line() {
        let err = load_topology("node 0\nlink 0:i1 0:i2 1 1").unwrap_err();
        assert_eq!(err, TopologyError::SelfLoop { line: 2, label: 0 });
    }

    #[test]
    fn negative_cost_and_syntax_errors() {
        let err = load_topology("node 0\nnode 1\nlink 0:a 1:b -2 1").unwrap_err();
        assert_eq!(err, TopologyError::NegativeCost { line: 3 });
        let err = load_topology("node 0\nnode x").unwrap_err();
        assert!(matches!(err, TopologyError::Syntax { line: 2, .. }));
        let err = load_topology("node 0\nnode 1\nlink 0 1 1 1").unwrap_err();
        assert!(matches!(err, TopologyError::Syntax { line: 3, .. }));
        let err = load_topology("node 0\nnode 1\nlink 0:a-b 1:c 1 1").unwrap_err();
        assert!(matches!(err, TopologyError::Syntax { line: 3, .. }));
        let err = load_topology("route 0").unwrap_err();
        assert!(matches!(err, TopologyError::Syntax { line: 1, .. }));
    }

    #[test]
    fn duplicate_interface_rejected() {
        let err = load_topology("node 0\nnode 1\nnode 2\nlink 0:i1 1:i1 1 1\nlink 0:i1 2:i1 1 1").unwrap_err();
        assert!(matches!(err, TopologyError::DuplicateInterface { label: 0, .. }));
    }

    #[test]
    fn comments_blank_lines_and_labels() {
        let text = "# header\nnode 7   # router seven\n\nnode 3\nlink 7:eth0 3:eth1 2.5 4\n";
        let t = load_topology(text).unwrap();
        assert_eq!(t.label(RouterId(0)), 7);
        assert_eq!(t.router_by_label(3), Some(RouterId(1)));
        assert_eq!(t.port(RouterId(0), 0).cost_out, "2.5".parse().unwrap());
        assert_eq!(t.port(RouterId(0), 0).cost_in, Cost::from_int(4));
        assert_eq!(load_topology(&emit_topology(&t)).unwrap(), t);
    }

    #[test]
    fn chain_file_has_diameter_three() {
        let text = "node 0\nnode 1\nnode 2\nnode 3\nlink 0:i1 1:i1 1 1\nlink 1:i2 2:i1 1 1\nlink 2:i2 3:i1 1 1\n";
        let t = load_topology(text).unwrap();
        // BFS oracle written out by hand for the chain: eccentricity of 0 is 3.
        let hops: Vec<usize> = t.hop_distances(RouterId(0)).into_iter().map(Option::unwrap).collect();
        assert_eq!(hops, vec![0, 1, 2, 3]);
        assert_eq!(t.diameter().unwrap(), 3);
    }
}
