//! Color erasure: encode vertex colors into an uncolored simple graph with a
//! universal vertex and a pendant-anchored path over the palette. Color
//! refinement re-discretizes the scaffold and recomputes the original
//! classes, so WL behavior on the original vertices is preserved.

use super::GenError;
use crate::structures::{RelName, Structure, VertexId};

pub fn erase_colors(g: &Structure) -> Result<Structure, GenError> {
    if g.is_directed() {
        return Err(GenError::InvalidInput("input must be undirected".into()));
    }
    for rel in g.relations() {
        if !matches!(rel.name, RelName::Edge(0)) {
            return Err(GenError::InvalidInput(
                "input must be a simple graph with uncolored edges".into(),
            ));
        }
    }
    let n = g.vertex_count();
    let m = g.color_count().max(1);
    let universal = n as VertexId;
    let path0 = n as VertexId + 1;
    let pendant = path0 + m as VertexId;
    let total = n + 1 + m + 1;
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    if let Some(rel) = g.relation(&RelName::Edge(0)) {
        for (u, v) in rel.pairs() {
            if u < v {
                edges.push((u, v));
            }
        }
    }
    // universal vertex over the original graph only
    for v in 0..n as VertexId {
        edges.push((v, universal));
    }
    // palette path with a degree-one endpoint
    for c in 0..m.saturating_sub(1) as VertexId {
        edges.push((path0 + c, path0 + c + 1));
    }
    edges.push((pendant, path0));
    // membership edges
    for v in 0..n as VertexId {
        edges.push((v, path0 + g.vertex_color(v)));
    }
    Ok(Structure::simple_graph(total, &edges).expect("erasure is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{wl, EngineConfig};

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    #[test]
    fn scaffold_size_one_color() {
        let g = Structure::simple_graph(3, &[(0, 1), (1, 2)]).unwrap();
        let e = erase_colors(&g).unwrap();
        // universal + one palette vertex + pendant
        assert_eq!(e.vertex_count(), 3 + 3);
        assert_eq!(e.color_count(), 1);
    }

    #[test]
    fn refinement_recovers_classes_and_discretizes_scaffold() {
        let g = Structure::colored_graph(
            6,
            vec![0, 0, 1, 1, 2, 2],
            &[(0, 2), (1, 3), (2, 4), (3, 5)],
            &[],
        )
        .unwrap();
        let e = erase_colors(&g).unwrap();
        let col = wl::stable_coloring(&e, 1, &cfg()).unwrap();
        let n = g.vertex_count();
        // scaffold vertices are singletons
        for v in n..e.vertex_count() {
            for w in n..e.vertex_count() {
                if v != w {
                    assert_ne!(col.tuple_color[v], col.tuple_color[w]);
                }
            }
            for w in 0..n {
                assert_ne!(col.tuple_color[v], col.tuple_color[w]);
            }
        }
        // original classes refine the declared coloring
        for v in 0..n {
            for w in 0..n {
                if col.tuple_color[v] == col.tuple_color[w] {
                    assert_eq!(g.vertex_color(v as u32), g.vertex_color(w as u32));
                }
            }
        }
    }
}
