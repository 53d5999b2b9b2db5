//! Logic-gate gadgets: an AND gate splits its output pair when either input
//! pair splits; an OR gate (a degree-3 CFI gadget) splits its output only
//! when both inputs split.

use super::GenError;
use crate::structures::{Structure, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    And,
    Or,
}

#[derive(Debug)]
pub struct GateOutput {
    pub structure: Structure,
    pub input_pairs: [(VertexId, VertexId); 2],
    pub output_pair: (VertexId, VertexId),
}

pub fn gate_gadget(kind: GateKind) -> Result<GateOutput, GenError> {
    match kind {
        GateKind::And => {
            // inputs (0,1) and (2,3), output (4,5); each output vertex sees
            // one side of each input
            let colors = vec![0, 0, 1, 1, 2, 2];
            let edges = [(0, 4), (2, 4), (1, 5), (3, 5)];
            let structure = Structure::colored_graph(6, colors, &edges, &[]).unwrap();
            Ok(GateOutput {
                structure,
                input_pairs: [(0, 1), (2, 3)],
                output_pair: (4, 5),
            })
        }
        GateKind::Or => {
            // degree-3 CFI gadget: inputs (0,1), (2,3), middle 4..=7,
            // output (8,9)
            let colors = vec![0, 0, 1, 1, 2, 2, 2, 2, 3, 3];
            let edges = [
                (8, 4),
                (8, 5),
                (9, 6),
                (9, 7),
                (0, 4),
                (0, 6),
                (1, 5),
                (1, 7),
                (2, 4),
                (2, 7),
                (3, 5),
                (3, 6),
            ];
            let structure = Structure::colored_graph(10, colors, &edges, &[]).unwrap();
            Ok(GateOutput {
                structure,
                input_pairs: [(0, 1), (2, 3)],
                output_pair: (8, 9),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{groups, wl, EngineConfig};

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    fn split_pair(s: &Structure, v: VertexId) -> Structure {
        let fresh = s.color_count() as u32;
        s.recolor_vertex(v, fresh)
    }

    fn output_split(s: &Structure, pair: (VertexId, VertexId)) -> bool {
        let col = wl::stable_coloring(s, 2, &cfg()).unwrap();
        col.diagonal_color(pair.0) != col.diagonal_color(pair.1)
    }

    #[test]
    fn and_gate_splits_on_one_input() {
        let g = gate_gadget(GateKind::And).unwrap();
        assert!(!output_split(&g.structure, g.output_pair));
        let s = split_pair(&g.structure, g.input_pairs[0].0);
        assert!(output_split(&s, g.output_pair));
    }

    #[test]
    fn or_gate_needs_both_inputs() {
        let g = gate_gadget(GateKind::Or).unwrap();
        assert!(!output_split(&g.structure, g.output_pair));
        let one = split_pair(&g.structure, g.input_pairs[0].0);
        assert!(!output_split(&one, g.output_pair));
        let both = split_pair(&one, g.input_pairs[1].0);
        assert!(output_split(&both, g.output_pair));
    }

    #[test]
    fn and_output_swaps_only_with_both_inputs() {
        let g = gate_gadget(GateKind::And).unwrap();
        let gens = groups::automorphism_generators(&g.structure, &cfg()).unwrap();
        let chain = groups::StabilizerChain::build(&gens);
        // the swap of only the output pair is not an automorphism
        let swap_out =
            groups::Permutation::from_images(vec![0, 1, 2, 3, 5, 4]).unwrap();
        assert!(!chain.contains(&swap_out));
        // swapping output and both inputs is
        let swap_all =
            groups::Permutation::from_images(vec![1, 0, 3, 2, 5, 4]).unwrap();
        assert!(chain.contains(&swap_all));
        // swapping output and one input is not
        let swap_one =
            groups::Permutation::from_images(vec![1, 0, 2, 3, 5, 4]).unwrap();
        assert!(!chain.contains(&swap_one));
    }
}
