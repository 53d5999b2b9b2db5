//! The CFI construction: every base vertex becomes a gadget with one inner
//! class (even-parity bit vectors over its incident edges) and one outer pair
//! per incident edge; gadgets are joined by matchings that are twisted where
//! the assignment is 1. Twist parity is the only isomorphism invariant.

use std::collections::BTreeMap;

use super::GenError;
use crate::structures::{Structure, VertexId};

/// A connected simple undirected base graph with a canonical sorted edge
/// list; edges are referred to by their index in that list.
#[derive(Debug, Clone)]
pub struct BaseGraph {
    pub n: usize,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl BaseGraph {
    pub fn new(n: usize, edges: &[(VertexId, VertexId)]) -> Result<BaseGraph, GenError> {
        let mut norm: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        norm.sort_unstable();
        norm.dedup();
        for &(u, v) in &norm {
            if u == v {
                return Err(GenError::InvalidInput(format!("self-loop at {u}")));
            }
            if v as usize >= n {
                return Err(GenError::InvalidInput(format!("edge endpoint {v} >= {n}")));
            }
        }
        // connectivity
        if n > 0 {
            let mut adj = vec![Vec::new(); n];
            for &(u, v) in &norm {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
            let mut seen = vec![false; n];
            let mut stack = vec![0u32];
            seen[0] = true;
            while let Some(x) = stack.pop() {
                for &y in &adj[x as usize] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
            if seen.iter().any(|&s| !s) {
                return Err(GenError::InvalidInput("base graph not connected".into()));
            }
        }
        Ok(BaseGraph { n, edges: norm })
    }

    pub fn cycle(n: usize) -> BaseGraph {
        let edges: Vec<(u32, u32)> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
        BaseGraph::new(n, &edges).expect("cycle is valid")
    }

    pub fn complete(n: usize) -> BaseGraph {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                edges.push((u, v));
            }
        }
        BaseGraph::new(n, &edges).expect("complete graph is valid")
    }

    pub fn path(n: usize) -> BaseGraph {
        let edges: Vec<(u32, u32)> = (0..n as u32 - 1).map(|i| (i, i + 1)).collect();
        BaseGraph::new(n, &edges).expect("path is valid")
    }

    pub fn grid(rows: usize, cols: usize) -> BaseGraph {
        let id = |r: usize, c: usize| (r * cols + c) as u32;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((id(r, c), id(r + 1, c)));
                }
            }
        }
        BaseGraph::new(rows * cols, &edges).expect("grid is valid")
    }

    pub fn to_structure(&self) -> Structure {
        Structure::simple_graph(self.n, &self.edges).expect("base graph is a valid structure")
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

/// Twist assignment f: E -> F2, or just its parity (a single twist on the
/// first edge).
#[derive(Debug, Clone)]
pub enum Twist {
    Parity(bool),
    Edges(Vec<usize>),
}

impl Twist {
    fn bit(&self, edge_index: usize) -> bool {
        match self {
            Twist::Parity(false) => false,
            Twist::Parity(true) => edge_index == 0,
            Twist::Edges(set) => set.contains(&edge_index),
        }
    }

    pub fn parity(&self, edge_count: usize) -> bool {
        (0..edge_count).filter(|&e| self.bit(e)).count() % 2 == 1
    }
}

/// One outer pair of the construction: which base vertex and incident slot it
/// belongs to, and its two vertex ids (the 0-side first).
#[derive(Debug, Clone)]
pub struct PairEntry {
    pub base_vertex: VertexId,
    /// Edge index in the base graph, or `usize::MAX - p` for phantom slot p.
    pub slot: usize,
    pub zero: VertexId,
    pub one: VertexId,
}

#[derive(Debug)]
pub struct CfiOutput {
    pub structure: Structure,
    pub pairs: Vec<PairEntry>,
    /// Inner class members per base vertex.
    pub inner: Vec<Vec<VertexId>>,
}

/// CFI graph over `base` with the given twist. With `abelianize`, pairs of
/// same-class vertices sharing common neighbors get an extra edge whose color
/// encodes the common neighbors' classes, making every class's automorphism
/// group abelian without changing refinement behavior.
pub fn cfi(base: &BaseGraph, twist: &Twist, abelianize: bool) -> Result<CfiOutput, GenError> {
    cfi_with_phantoms(base, twist, &[], abelianize)
}

/// CFI construction where each vertex listed in `phantoms` gets one extra
/// incidence slot with no partner gadget; the slot's outer pair is left free
/// (this is how one-way switches obtain their output pair).
pub(super) fn cfi_with_phantoms(
    base: &BaseGraph,
    twist: &Twist,
    phantoms: &[VertexId],
    abelianize: bool,
) -> Result<CfiOutput, GenError> {
    let nb = base.n;
    // incidence slots per base vertex: real edge indices, then phantom slots
    let mut slots: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for (ei, &(u, v)) in base.edges.iter().enumerate() {
        slots[u as usize].push(ei);
        slots[v as usize].push(ei);
    }
    for (pi, &v) in phantoms.iter().enumerate() {
        slots[v as usize].push(usize::MAX - pi);
    }

    let mut colors: Vec<u32> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut edge_colors: Vec<u32> = Vec::new();
    let mut next_color = 0u32;
    let mut inner: Vec<Vec<VertexId>> = vec![Vec::new(); nb];
    let mut pairs: Vec<PairEntry> = Vec::new();
    // (edge index, base vertex) -> pair entry index, for the matchings
    let mut pair_at: BTreeMap<(usize, u32), usize> = BTreeMap::new();

    for v in 0..nb as u32 {
        let d = slots[v as usize].len();
        if d == 0 {
            return Err(GenError::InvalidInput(format!(
                "base vertex {v} has degree 0"
            )));
        }
        if d > 7 {
            return Err(GenError::DegreeTooLarge(d));
        }
        // inner: even-parity bit vectors over the local slots, ascending
        let inner_color = next_color;
        next_color += 1;
        let mut inner_ids: Vec<u32> = Vec::new();
        for x in 0..(1u32 << d) {
            if x.count_ones() % 2 == 0 {
                inner_ids.push(colors.len() as u32);
                colors.push(inner_color);
            }
        }
        inner[v as usize] = inner_ids.clone();
        // outer pairs per slot
        let mut outer_ids: Vec<(u32, u32)> = Vec::new();
        for (j, &slot) in slots[v as usize].iter().enumerate() {
            let pair_color = next_color;
            next_color += 1;
            let zero = colors.len() as u32;
            colors.push(pair_color);
            let one = colors.len() as u32;
            colors.push(pair_color);
            outer_ids.push((zero, one));
            pair_at.insert((slot, v), pairs.len());
            pairs.push(PairEntry {
                base_vertex: v,
                slot,
                zero,
                one,
            });
            let _ = j;
        }
        // inner-outer edges: inner x adjacent to the b-side of slot j iff
        // bit j of x equals b
        let mut inner_iter = inner_ids.iter();
        for x in 0..(1u32 << d) {
            if x.count_ones() % 2 != 0 {
                continue;
            }
            let xv = *inner_iter.next().unwrap();
            for (j, &(zero, one)) in outer_ids.iter().enumerate() {
                let side = if (x >> j) & 1 == 0 { zero } else { one };
                edges.push((xv, side));
                edge_colors.push(0);
            }
        }
    }

    // matchings between gadgets, twisted where f(e) = 1
    for (ei, &(u, v)) in base.edges.iter().enumerate() {
        let pu = &pairs[pair_at[&(ei, u)]];
        let pv = &pairs[pair_at[&(ei, v)]];
        let (u0, u1) = (pu.zero, pu.one);
        let (v0, v1) = (pv.zero, pv.one);
        if twist.bit(ei) {
            edges.push((u0, v1));
            edges.push((u1, v0));
        } else {
            edges.push((u0, v0));
            edges.push((u1, v1));
        }
        edge_colors.push(0);
        edge_colors.push(0);
    }

    if abelianize {
        abelianize_classes(&colors, &mut edges, &mut edge_colors);
    }

    let structure = Structure::colored_graph(colors.len(), colors, &edges, &edge_colors)
        .expect("construction is valid");
    Ok(CfiOutput {
        structure,
        pairs,
        inner,
    })
}

/// Adds an intra-class edge for every same-class pair with common neighbors,
/// colored by the classes of those common neighbors.
fn abelianize_classes(colors: &[u32], edges: &mut Vec<(u32, u32)>, edge_colors: &mut Vec<u32>) {
    let n = colors.len();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v) in edges.iter() {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let mut classes: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (v, &c) in colors.iter().enumerate() {
        classes.entry(c).or_default().push(v as u32);
    }
    // first pass: collect keys for a canonical palette
    let mut pending: Vec<((u32, u32), Vec<u32>)> = Vec::new();
    for members in classes.values() {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                let common: Vec<u32> = intersect_sorted(&adj[a as usize], &adj[b as usize])
                    .into_iter()
                    .map(|w| colors[w as usize])
                    .collect();
                if !common.is_empty() {
                    let mut key = common;
                    key.sort_unstable();
                    pending.push(((a, b), key));
                }
            }
        }
    }
    let mut palette: Vec<Vec<u32>> = pending.iter().map(|(_, k)| k.clone()).collect();
    palette.sort();
    palette.dedup();
    for ((a, b), key) in pending {
        let idx = palette.binary_search(&key).unwrap() as u32;
        edges.push((a, b));
        edge_colors.push(1 + idx);
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups;
    use crate::EngineConfig;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    #[test]
    fn gadget_sizes() {
        // degree-3 gadget: 4 inner + 3 outer pairs = 10 vertices per vertex
        let k4 = BaseGraph::complete(4);
        let out = cfi(&k4, &Twist::Parity(false), false).unwrap();
        assert_eq!(out.structure.vertex_count(), 4 * 10);
        // cycles: 2 inner + 4 outer per degree-2 vertex
        let c5 = BaseGraph::cycle(5);
        let out = cfi(&c5, &Twist::Parity(false), false).unwrap();
        assert_eq!(out.structure.vertex_count(), 6 * 5);
    }

    #[test]
    fn max_class_size_of_cubic_base() {
        let k4 = BaseGraph::complete(4);
        let out = cfi(&k4, &Twist::Parity(false), false).unwrap();
        assert_eq!(out.structure.bound_report(false).max_class_size, 4);
    }

    #[test]
    fn twist_parity_decides_isomorphism() {
        let k4 = BaseGraph::complete(4);
        let plain = cfi(&k4, &Twist::Parity(false), false).unwrap();
        let twisted = cfi(&k4, &Twist::Parity(true), false).unwrap();
        // odd twist difference: non-isomorphic
        assert!(groups::isomorphic(&plain.structure, &twisted.structure, &cfg())
            .unwrap()
            .is_none());
        // two single twists on different edges: isomorphic (sum f = sum g)
        let t2 = cfi(&k4, &Twist::Edges(vec![3]), false).unwrap();
        assert!(groups::isomorphic(&twisted.structure, &t2.structure, &cfg())
            .unwrap()
            .is_some());
        // double twist cancels out
        let t3 = cfi(&k4, &Twist::Edges(vec![0, 1]), false).unwrap();
        assert!(groups::isomorphic(&plain.structure, &t3.structure, &cfg())
            .unwrap()
            .is_some());
    }

    #[test]
    fn cfi_serialize_round_trip() {
        let out = cfi(&BaseGraph::complete(4), &Twist::Parity(false), false).unwrap();
        let text = out.structure.serialize();
        let back = Structure::parse(&text).unwrap();
        assert_eq!(out.structure, back);
        assert_eq!(text, back.serialize());
    }

    #[test]
    fn abelianized_classes_are_abelian() {
        let out = cfi(&BaseGraph::complete(4), &Twist::Parity(false), true).unwrap();
        let report = out.structure.bound_report(true);
        assert!(report.abelian_flags.iter().all(|f| *f == Some(true)));
        // without the extra edges the inner classes are free and non-abelian
        let plain = cfi(&BaseGraph::complete(4), &Twist::Parity(false), false).unwrap();
        let report = plain.structure.bound_report(true);
        assert!(report.abelian_flags.iter().any(|f| *f == Some(false)));
    }

    #[test]
    fn abelianize_does_not_change_refinement() {
        let plain = cfi(&BaseGraph::cycle(5), &Twist::Parity(false), false).unwrap();
        let ab = cfi(&BaseGraph::cycle(5), &Twist::Parity(false), true).unwrap();
        let cp = crate::wl::stable_coloring(&plain.structure, 2, &cfg()).unwrap();
        let ca = crate::wl::stable_coloring(&ab.structure, 2, &cfg()).unwrap();
        assert!(cp.same_partition(&ca));
    }

    #[test]
    fn automorphism_group_order_of_cfi_cycle() {
        // gadget twists along the unique cycle of C5 give the only nontrivial
        // automorphism of the class-colored graph: order 2 (verified against
        // the group built from searched generators)
        let out = cfi(&BaseGraph::cycle(5), &Twist::Parity(false), false).unwrap();
        let gens = groups::automorphism_generators(&out.structure, &cfg()).unwrap();
        assert_eq!(groups::group_order(&gens), 2);
    }
}
