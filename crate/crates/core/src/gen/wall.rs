//! Wall base graphs for the one-way switches: k-1 rows of k bricks drawn on
//! an integer grid, trimmed at two corners, with an apex vertex attached to
//! the two top-row endpoints. The invariants that matter (tree-width k+1
//! with the apex, k without; apex on a cycle) are oracle-verified in tests.

use std::collections::BTreeMap;

use super::cfi::BaseGraph;
use crate::structures::VertexId;

/// Returns (B_k, apex vertex id). The apex has degree 2; every other vertex
/// has degree at most 3.
pub fn wall_base(k: usize) -> (BaseGraph, VertexId) {
    assert!(k >= 2);
    let cols = 2 * k + 2;
    let rows = k;
    // grid vertices minus the two trimmed corners (1,1) and (1,rows)
    let mut id: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for y in 1..=rows {
        for x in 1..=cols {
            if x == 1 && (y == 1 || y == rows) {
                continue;
            }
            let next = id.len() as u32;
            id.insert((x, y), next);
        }
    }
    let apex = id.len() as u32;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    // horizontal rows fully connected
    for y in 1..=rows {
        for x in 1..cols {
            if let (Some(&a), Some(&b)) = (id.get(&(x, y)), id.get(&(x + 1, y))) {
                edges.push((a, b));
            }
        }
    }
    // vertical rungs on alternating parity
    for y in 2..=rows {
        for x in 1..=cols {
            if (x + y) % 2 == 0 {
                if let (Some(&a), Some(&b)) = (id.get(&(x, y - 1)), id.get(&(x, y))) {
                    edges.push((a, b));
                }
            }
        }
    }
    // apex attached to the two top-row endpoints
    edges.push((id[&(2, rows)], apex));
    edges.push((id[&(cols, rows)], apex));
    let base = BaseGraph::new(apex as usize + 1, &edges).expect("wall is valid");
    (base, apex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::treewidth_exact;

    #[test]
    fn b2_shape() {
        let (b, apex) = wall_base(2);
        // 2 rows x 6 columns minus two trimmed corners, plus the apex
        assert_eq!(b.n, 11);
        assert_eq!(b.degree(apex), 2);
        assert!(b.edges.iter().all(|&(u, v)| u != v));
        assert!((0..b.n as u32).all(|v| b.degree(v) <= 3));
    }

    #[test]
    fn b2_treewidth() {
        let (b, apex) = wall_base(2);
        let g = b.to_structure();
        assert_eq!(treewidth_exact(&g).unwrap(), 3); // k + 1
        let without: Vec<u32> = (0..g.vertex_count() as u32).filter(|&v| v != apex).collect();
        let minus = g.induced(&without);
        assert_eq!(treewidth_exact(&minus).unwrap(), 2); // k
    }

    #[test]
    fn apex_lies_on_a_cycle() {
        // the apex closes a cycle through the top row: removing either apex
        // edge keeps the graph connected
        let (b, apex) = wall_base(3);
        let apex_edges: Vec<usize> = b
            .edges
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| u == apex || v == apex)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(apex_edges.len(), 2);
        let reduced: Vec<(u32, u32)> = b
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != apex_edges[0])
            .map(|(_, &e)| e)
            .collect();
        assert!(BaseGraph::new(b.n, &reduced).is_ok()); // still connected
    }
}
