use wlkit_core::*;
use wlkit_core::gen::{mcvp_graph, MonotoneCircuit};
use std::time::Instant;
fn main() {
    let cfg = EngineConfig::default();
    let text = "input a true\ninput b false\nand g1 a b\noutput g1\n";
    let m = MonotoneCircuit::parse(text).unwrap();
    let t = Instant::now();
    let out = mcvp_graph(&m, 2).unwrap();
    println!("gen 1-gate: {:?}; |G|={}", t.elapsed(), out.g.vertex_count());
    let t = Instant::now();
    let col = wl::stable_coloring(&out.g, 2, &cfg).unwrap();
    println!("stable G 1-gate: {:?} colors={} rounds={} history0={}",
        t.elapsed(), col.color_count, col.round_count, col.history[0]);
}
