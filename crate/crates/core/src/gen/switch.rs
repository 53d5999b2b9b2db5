//! One-way switches: the CFI graph of the wall base B_k where the apex
//! carries a degree-3 gadget (one slot left free). Splitting the input pair
//! forces WL[k] to split the output pair, but no automorphism exchanges the
//! output vertices.

use super::cfi::{cfi_with_phantoms, BaseGraph, Twist};
use super::wall::wall_base;
use super::GenError;
use crate::structures::{Structure, VertexId};

#[derive(Debug)]
pub struct OwsOutput {
    pub structure: Structure,
    pub input_pair: (VertexId, VertexId),
    pub output_pair: (VertexId, VertexId),
    pub base: BaseGraph,
    pub apex: VertexId,
}

pub fn one_way_switch(k: usize) -> Result<OwsOutput, GenError> {
    let (base, apex) = wall_base(k);
    let out = cfi_with_phantoms(&base, &Twist::Parity(false), &[apex], false)?;
    // output: the phantom slot's outer pair at the apex
    let output = out
        .pairs
        .iter()
        .find(|p| p.base_vertex == apex && p.slot > base.edges.len())
        .expect("phantom pair exists");
    // input: the pair of the lexicographically first real apex edge
    let first_apex_edge = base
        .edges
        .iter()
        .enumerate()
        .filter(|(_, &(u, v))| u == apex || v == apex)
        .map(|(i, _)| i)
        .min()
        .expect("apex has incident edges");
    let input = out
        .pairs
        .iter()
        .find(|p| p.base_vertex == apex && p.slot == first_apex_edge)
        .expect("apex edge pair exists");
    Ok(OwsOutput {
        structure: out.structure,
        input_pair: (input.zero, input.one),
        output_pair: (output.zero, output.one),
        base,
        apex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{groups, wl, EngineConfig};

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    #[test]
    fn switch_shape() {
        let ows = one_way_switch(2).unwrap();
        // wall B_2 has 11 vertices; apex gadget is degree 3
        let n: usize = (0..ows.base.n as u32)
            .map(|v| {
                let d = if v == ows.apex {
                    3
                } else {
                    ows.base.degree(v)
                };
                (1usize << (d - 1)) + 2 * d
            })
            .sum();
        assert_eq!(ows.structure.vertex_count(), n);
        assert_eq!(ows.structure.bound_report(false).max_class_size, 4);
    }

    #[test]
    fn input_split_propagates_to_output() {
        let ows = one_way_switch(2).unwrap();
        let fresh = ows.structure.color_count() as u32;
        let split = ows.structure.recolor_vertex(ows.input_pair.0, fresh);
        let col = wl::stable_coloring(&split, 2, &cfg()).unwrap();
        assert_ne!(
            col.diagonal_color(ows.output_pair.0),
            col.diagonal_color(ows.output_pair.1),
            "split input must split the output pair"
        );
        // unsplit switch keeps the output pair together
        let col0 = wl::stable_coloring(&ows.structure, 2, &cfg()).unwrap();
        assert_eq!(
            col0.diagonal_color(ows.output_pair.0),
            col0.diagonal_color(ows.output_pair.1)
        );
    }

    #[test]
    fn no_automorphism_swaps_the_output() {
        let ows = one_way_switch(2).unwrap();
        let gens = groups::automorphism_generators(&ows.structure, &cfg()).unwrap();
        let orbit = groups::orbit_of(
            ows.output_pair.0,
            gens.generators().iter(),
            ows.structure.vertex_count(),
        );
        assert!(!orbit.contains(&ows.output_pair.1));
        // while the input pair can be exchanged (the apex lies on a cycle)
        let orbit_in = groups::orbit_of(
            ows.input_pair.0,
            gens.generators().iter(),
            ows.structure.vertex_count(),
        );
        assert!(orbit_in.contains(&ows.input_pair.1));
    }
}
