//! Mesh geometry and deterministic XY routing: print the route every
//! message takes on a 3x3 grid, and what a label transfer costs in
//! nanoseconds depending on distance and payload width.
//!
//! Run with: `cargo run --example xy_routing`

use amalthea_kit::noc::{NocPlatform, DEFAULT_FLIT_BITS, DEFAULT_HOP_LATENCY_NS};

fn main() {
    let platform = NocPlatform::mesh(
        3,
        3,
        9,
        1,
        1_000_000_000,
        DEFAULT_HOP_LATENCY_NS,
        DEFAULT_FLIT_BITS,
    )
    .unwrap();

    println!("3x3 mesh, XY (dimension-ordered) routing\n");

    // A route resolves its X displacement before it touches Y, so every
    // source/destination pair has exactly one path.
    let from = (0, 2);
    for to in [(2, 0), (0, 0), (2, 2), (1, 1)] {
        let route = platform.xy_route(from, to).unwrap();
        let steps: Vec<String> =
            route.path.iter().map(|(x, y)| format!("({x},{y})")).collect();
        println!("{from:?} -> {to:?}: {} hops  {}", route.hops(), steps.join(" "));
    }

    // Latency scales with hops and flit count: a 40-bit payload needs two
    // 32-bit flits, doubling the per-hop cost.
    println!("\n{:<12} {:>10} {:>14} {:>14}", "distance", "hops", "16-bit [ns]", "40-bit [ns]");
    for to in [(0, 2), (1, 2), (2, 2), (2, 1), (2, 0)] {
        let hops = platform.xy_route(from, to).unwrap().hops();
        println!(
            "{:<12} {:>10} {:>14} {:>14}",
            format!("{from:?}->{to:?}"),
            hops,
            platform.message_latency(16, from, to).unwrap(),
            platform.message_latency(40, from, to).unwrap()
        );
    }

    // Inactive cores still route: a 2x2 platform with one active core keeps
    // all four routers usable, so a label may live on a core that computes
    // nothing.
    let partial = NocPlatform::mesh(2, 2, 1, 1, 1_000_000_000, 10, 32).unwrap();
    println!(
        "\n2x2 with 1 active core: active={:?}, but (0,0)->(1,1) still routes {} hops",
        partial.active_cores(),
        partial.xy_route((0, 0), (1, 1)).unwrap().hops()
    );
}
