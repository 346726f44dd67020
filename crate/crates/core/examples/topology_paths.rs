//! Build topologies from generator specs, round-trip them through the text
//! format and list every loop-free path between two routers.
//!
//!     cargo run --example topology_paths -- velcro:10,3,2 0 1

use reachsim::topology::{emit_topology, enumerate_loop_free_paths, generate, load_topology, GeneratorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec: GeneratorSpec = args.first().map_or("complete:4", String::as_str).parse()?;
    let (src, dst): (u32, u32) = match args.as_slice() {
        [_, s, d, ..] => (s.parse()?, d.parse()?),
        _ => (0, 1),
    };

    let t = generate(&spec)?;
    let text = emit_topology(&t);
    assert_eq!(load_topology(&text)?, t);
    println!("{spec}: {} routers, {} links, hop diameter {}", t.router_count(), t.link_count(), t.diameter()?);
    print!("{text}");

    let s = t.router_by_label(src).ok_or("unknown source")?;
    let d = t.router_by_label(dst).ok_or("unknown destination")?;
    let paths = enumerate_loop_free_paths(&t, s, d, Some(10_000));
    println!("\n{} loop-free paths {src} -> {dst}{}", paths.paths.len(), if paths.truncated { " (truncated)" } else { "" });
    for p in paths.paths.iter().take(20) {
        let labels: Vec<String> = p.routers().iter().map(|&r| t.label(r).to_string()).collect();
        println!("  {:<30} cost {}", labels.join(" -> "), p.total_cost);
    }
    Ok(())
}
