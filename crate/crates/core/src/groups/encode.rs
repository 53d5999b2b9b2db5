//! Tuple-incidence encoding of higher-arity structures into edge-colored
//! graphs, so the individualization-refinement engine only ever sees binary
//! relations. One fresh vertex per tuple of each relation of arity >= 3,
//! joined to its entries by position-tagged directed edges; isomorphisms of
//! the encoding restricted to the original vertices are exactly the
//! isomorphisms of the input.

use crate::structures::{RelName, Relation, Structure, VertexId};

pub struct KaryEncoding {
    pub graph: Structure,
    /// The first `original_count` vertices of `graph` are the input vertices.
    pub original_count: usize,
}

pub fn encode_kary_as_colored_graph(s: &Structure) -> KaryEncoding {
    let n = s.vertex_count();
    if s.max_arity() <= 2 {
        return KaryEncoding {
            graph: s.clone(),
            original_count: n,
        };
    }
    let color_base = s.color_count() as u32;
    let mut colors = s.vertex_colors().to_vec();
    let mut relations: Vec<Relation> = Vec::new();
    let mut position_edges: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); crate::K_MAX];
    let mut next = n as VertexId;
    let mut wide = 0u32;
    for rel in s.relations() {
        if rel.arity <= 2 {
            relations.push(rel.clone());
            continue;
        }
        for t in rel.tuples() {
            let tv = next;
            next += 1;
            colors.push(color_base + wide);
            for (i, &v) in t.iter().enumerate() {
                position_edges[i].push((tv, v));
            }
        }
        wide += 1;
    }
    for (i, pairs) in position_edges.into_iter().enumerate() {
        if !pairs.is_empty() {
            relations.push(Relation::from_pairs(
                RelName::Named(format!("__pos{i}")),
                pairs,
            ));
        }
    }
    let graph = Structure::new(next as usize, true, colors, relations)
        .expect("encoding produces a valid structure");
    KaryEncoding {
        graph,
        original_count: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_structure_is_identity() {
        let s = Structure::simple_graph(3, &[(0, 1)]).unwrap();
        let e = encode_kary_as_colored_graph(&s);
        assert_eq!(e.graph, s);
        assert_eq!(e.original_count, 3);
    }

    #[test]
    fn single_ternary_tuple() {
        let s = Structure::parse("p struct 3 directed\nr mult 3 0 1 2\n").unwrap();
        let e = encode_kary_as_colored_graph(&s);
        assert_eq!(e.graph.vertex_count(), 4);
        assert_eq!(e.original_count, 3);
        // three position-colored edges
        let total: usize = e
            .graph
            .relations()
            .iter()
            .filter(|r| matches!(&r.name, RelName::Named(n) if n.starts_with("__pos")))
            .map(|r| r.len())
            .sum();
        assert_eq!(total, 3);
        // tuple vertex got a fresh color
        assert_eq!(e.graph.vertex_color(3), 1);
    }
}
