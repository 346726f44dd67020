use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use reachsim::topology::{emit_topology, generate, load_topology, GeneratorSpec};
use tempfile::TempDir;

fn reachsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reachsim")).args(args).env_remove("REACHSIM_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const SCENARIO: &str = "topology.spec = ring:5\nprotocol = ants\nduration_ms = 200\ndata.rate = 0.01\n";

fn run_in(dir: &TempDir, out: &str, extra: &[&str]) -> Output {
    let cfg = write(dir, "scenario.cfg", SCENARIO);
    let out = dir.path().join(out);
    let mut args = vec!["run", "--config", &cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    reachsim(&args)
}

fn hash(dir: &TempDir, out: &str) -> String {
    std::fs::read_to_string(dir.path().join(out).join("event_log.hash")).unwrap()
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(&dir, "out", &["--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["report.csv", "report.json", "tables.dump", "event_log.hash"] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert!(json.is_object());
    assert_eq!(hash(&dir, "out").trim().len(), 64);
}

#[test]
fn seeds_decide_the_event_log() {
    let dir = tempfile::tempdir().unwrap();
    for (out, seed) in [("a", "7"), ("b", "7"), ("c", "8")] {
        assert!(run_in(&dir, out, &["--seed", seed]).status.success());
    }
    assert_eq!(hash(&dir, "a"), hash(&dir, "b"));
    assert_ne!(hash(&dir, "a"), hash(&dir, "c"));

    // The environment variable stands in for a missing --seed.
    let cfg = write(&dir, "scenario.cfg", SCENARIO);
    let out = dir.path().join("env");
    let o = Command::new(env!("CARGO_BIN_EXE_reachsim"))
        .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
        .env("REACHSIM_SEED", "7")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(hash(&dir, "env"), hash(&dir, "a"));

    // --set wins over --seed.
    assert!(run_in(&dir, "d", &["--seed", "8", "--set", "seed=7"]).status.success());
    assert_eq!(hash(&dir, "d"), hash(&dir, "a"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.topo");
    let cfg = write(&dir, "bad.cfg", &format!("topology.file = {}\n", missing.display()));
    let out = dir.path().join("out");
    let o = reachsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere.topo"), "{}", stderr(&o));

    let o = run_in(&dir, "out", &["--set", "duration_ms=-1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = run_in(&dir, "out", &["--set", "no.such.key=1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = reachsim(&["run", "--config", dir.path().join("absent.cfg").to_str().unwrap(), "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn disconnected_topology_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let topo = write(&dir, "split.topo", "node 0\nnode 1\nnode 2\nlink 0:i1 1:i1 1 1\n");
    let cfg = write(&dir, "s.cfg", &format!("topology.file = {topo}\nduration_ms = 10\n"));
    let out = dir.path().join("out");
    let o = reachsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn oracle_lists_loop_free_paths() {
    let dir = tempfile::tempdir().unwrap();
    let complete = dir.path().join("k3.topo");
    assert!(reachsim(&["gen", "complete:3", "--out", complete.to_str().unwrap()]).status.success());
    let o = reachsim(&["oracle", complete.to_str().unwrap(), "0", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["2 paths", "0 -> 2\tcost 1", "0 -> 1 -> 2\tcost 2"]);

    let chain = dir.path().join("chain.topo");
    assert!(reachsim(&["gen", "linear_chain:5", "--out", chain.to_str().unwrap()]).status.success());
    let o = reachsim(&["oracle", chain.to_str().unwrap(), "0", "4"]);
    assert_eq!(stdout(&o).lines().next(), Some("1 paths"));

    let split = write(&dir, "split.topo", "node 0\nnode 1\nnode 2\nlink 0:i1 1:i1 1 1\n");
    let o = reachsim(&["oracle", &split, "0", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0 paths");

    assert_eq!(reachsim(&["oracle", &split, "0", "9"]).status.code(), Some(2));
}

#[test]
fn gen_writes_loadable_topologies() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("chain.topo");
    assert!(reachsim(&["gen", "linear_chain:4", "--out", p.to_str().unwrap()]).status.success());
    let t = load_topology(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!((t.router_count(), t.link_count()), (4, 3));

    // Direct link and 2^5 loop-crossing routes all cost the same.
    let v = dir.path().join("velcro.topo");
    assert!(reachsim(&["gen", "velcro:10,5,2", "--out", v.to_str().unwrap()]).status.success());
    let text = stdout(&reachsim(&["oracle", v.to_str().unwrap(), "0", "1"]));
    let cheapest: Vec<&str> = text.lines().skip(1).filter(|l| l.ends_with("\tcost 10")).collect();
    assert_eq!(cheapest.len(), 33);
    assert_eq!(cheapest[0], "0 -> 1\tcost 10");
    let costs = text.lines().skip(1).map(|l| l.rsplit("cost ").next().unwrap().parse::<f64>().unwrap());
    assert!(costs.into_iter().all(|c| c >= 10.0));
}

#[test]
fn bad_generator_specs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.topo");
    for spec in ["ring:1", "velcro:0,5,2", "hypercube:3", "linear_chain:"] {
        let o = reachsim(&["gen", spec, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{spec}");
        assert!(!Path::new(&out).exists());
    }
}

fn any_spec() -> impl Strategy<Value = GeneratorSpec> {
    prop_oneof![
        (2usize..12).prop_map(GeneratorSpec::LinearChain),
        (3usize..12).prop_map(GeneratorSpec::Ring),
        (2usize..7).prop_map(GeneratorSpec::Complete),
        (1u64..20, 1usize..4, 2u64..6).prop_map(|(d, k, c)| GeneratorSpec::Velcro {
            direct_cost: reachsim::Cost::from_int(d),
            sections: k,
            section_cost: reachsim::Cost::from_int(c),
        }),
        (1usize..12, 0.1f64..1.0, 1u64..5, 0u64..5, any::<u64>()).prop_map(|(n, p, lo, extra, seed)| {
            GeneratorSpec::RandomConnected { n, edge_prob: p, cost_min: lo, cost_max: lo + extra, seed }
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emitted_topologies_round_trip(spec in any_spec()) {
        let t = generate(&spec).unwrap();
        let text = emit_topology(&t);
        let back = load_topology(&text).unwrap();
        prop_assert_eq!(emit_topology(&back), text);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn spec_strings_round_trip(spec in any_spec()) {
        let again: GeneratorSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(generate(&again).unwrap(), generate(&spec).unwrap());
    }
}
