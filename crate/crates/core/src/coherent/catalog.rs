//! The catalog of 2-ary coherent configurations on a single fiber of order
//! up to 5, and the interspace types that can appear between 4-fibers in
//! star-free configurations.

use super::{CoherentError, Configuration};

/// The eleven single-fiber types of order up to 5. Arrow variants are the
/// directed (non-symmetric) schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberLabel {
    K1,
    K2,
    K3,
    C3Arrow,
    K4,
    F4,
    C4,
    C4Arrow,
    K5,
    C5,
    C5Arrow,
}

impl std::fmt::Display for FiberLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FiberLabel::K1 => "K1",
            FiberLabel::K2 => "K2",
            FiberLabel::K3 => "K3",
            FiberLabel::C3Arrow => "C3->",
            FiberLabel::K4 => "K4",
            FiberLabel::F4 => "F4",
            FiberLabel::C4 => "C4",
            FiberLabel::C4Arrow => "C4->",
            FiberLabel::K5 => "K5",
            FiberLabel::C5 => "C5",
            FiberLabel::C5Arrow => "C5->",
        };
        f.write_str(s)
    }
}

/// Decides the catalog entry of a single fiber from (order, relation count,
/// symmetry profile, size profile). `UnknownType` signals a bug: every
/// coherent fiber of order <= 5 matches an entry.
pub fn classify_fiber(c: &Configuration, fiber: u32) -> Result<FiberLabel, CoherentError> {
    let members = c.fiber_members(fiber);
    let order = members.len();
    if order > 5 {
        return Err(CoherentError::FiberTooLarge(order));
    }
    // relations within the fiber, with sizes and symmetry
    let mut rels: Vec<u32> = Vec::new();
    for &u in members {
        for &v in members {
            let r = c.pair_relation(u, v);
            if !rels.contains(&r) {
                rels.push(r);
            }
        }
    }
    rels.sort_unstable();
    let diag = c.pair_relation(members[0], members[0]);
    let mut sizes: Vec<usize> = Vec::new();
    let mut sym_nonid = 0usize;
    for &r in &rels {
        let mut size = 0usize;
        let mut symmetric = true;
        for &u in members {
            for &v in members {
                if c.pair_relation(u, v) == r {
                    size += 1;
                    if c.pair_relation(v, u) != r {
                        symmetric = false;
                    }
                }
            }
        }
        sizes.push(size);
        if r != diag && symmetric {
            sym_nonid += 1;
        }
    }
    sizes.sort_unstable();
    let m = rels.len();
    let label = match (order, m) {
        (1, 1) => Some(FiberLabel::K1),
        (2, 2) if sizes == [2, 2] => Some(FiberLabel::K2),
        (3, 2) if sizes == [3, 6] => Some(FiberLabel::K3),
        (3, 3) if sizes == [3, 3, 3] && sym_nonid == 0 => Some(FiberLabel::C3Arrow),
        (4, 2) if sizes == [4, 12] => Some(FiberLabel::K4),
        (4, 3) if sizes == [4, 4, 8] => Some(FiberLabel::C4),
        (4, 4) if sizes == [4, 4, 4, 4] && sym_nonid == 3 => Some(FiberLabel::F4),
        (4, 4) if sizes == [4, 4, 4, 4] && sym_nonid == 1 => Some(FiberLabel::C4Arrow),
        (5, 2) if sizes == [5, 20] => Some(FiberLabel::K5),
        (5, 3) if sizes == [5, 10, 10] && sym_nonid == 2 => Some(FiberLabel::C5),
        (5, 5) if sizes == [5, 5, 5, 5, 5] && sym_nonid == 0 => Some(FiberLabel::C5Arrow),
        _ => None,
    };
    label.ok_or_else(|| {
        CoherentError::UnknownType(format!(
            "fiber {fiber}: order {order}, {m} relations, sizes {sizes:?}, {sym_nonid} symmetric"
        ))
    })
}

/// Interspace types between two distinct fibers that the pipeline cares
/// about: uniform, star-bearing, and the two non-uniform star-free types
/// between 4-fibers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterspaceType {
    Uniform,
    /// Some relation (in one direction or the other) is a disjoint union of
    /// stars.
    Star,
    TwoK22,
    C8,
    Other,
}

pub fn classify_interspace(c: &Configuration, x: u32, y: u32) -> InterspaceType {
    assert_ne!(x, y);
    let xs = c.fiber_members(x);
    let ys = c.fiber_members(y);
    let rels = c.interspace(x, y);
    if rels.len() == 1 {
        return InterspaceType::Uniform;
    }
    for &r in &rels {
        let size = c.pair_relation_info(r).2 as usize;
        if size == xs.len() || size == ys.len() {
            return InterspaceType::Star;
        }
    }
    if xs.len() == 4 && ys.len() == 4 && rels.len() == 2 {
        // both relations are 8 edges of degree 2; a C8 relation is one
        // connected 8-cycle, a 2K22 relation falls into two 4-cycles
        let r = rels[0];
        let mut adj: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
        for &u in xs {
            for &v in ys {
                if c.pair_relation(u, v) == r {
                    adj.entry(u).or_default().push(v + c.n as u32); // shift to keep sides apart
                    adj.entry(v + c.n as u32).or_default().push(u);
                }
            }
        }
        let start = *adj.keys().next().unwrap();
        let mut seen = std::collections::BTreeSet::new();
        let mut stack = vec![start];
        while let Some(w) = stack.pop() {
            if seen.insert(w) {
                for &z in &adj[&w] {
                    stack.push(z);
                }
            }
        }
        return if seen.len() == adj.len() {
            InterspaceType::C8
        } else {
            InterspaceType::TwoK22
        };
    }
    InterspaceType::Other
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::build_configuration;
    use crate::structures::{RelName, Relation, Structure};
    use crate::EngineConfig;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    fn undirected_cycle(n: usize) -> Structure {
        let edges: Vec<(u32, u32)> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
        Structure::simple_graph(n, &edges).unwrap()
    }

    fn directed_cycle(n: usize) -> Structure {
        let pairs: Vec<(u32, u32)> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
        Structure::new(
            n,
            true,
            vec![0; n],
            vec![Relation::from_pairs(RelName::Edge(0), pairs)],
        )
        .unwrap()
    }

    fn complete(n: usize) -> Structure {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                edges.push((u, v));
            }
        }
        Structure::simple_graph(n, &edges).unwrap()
    }

    #[test]
    fn canonical_witnesses() {
        let label = |s: &Structure| {
            let c = build_configuration(s, 2, &cfg()).unwrap();
            assert_eq!(c.fiber_count(), 1);
            classify_fiber(&c, 0).unwrap()
        };
        assert_eq!(label(&Structure::new(1, false, vec![0], vec![]).unwrap()), FiberLabel::K1);
        assert_eq!(label(&complete(2)), FiberLabel::K2);
        assert_eq!(label(&complete(3)), FiberLabel::K3);
        assert_eq!(label(&directed_cycle(3)), FiberLabel::C3Arrow);
        assert_eq!(label(&complete(4)), FiberLabel::K4);
        assert_eq!(label(&undirected_cycle(4)), FiberLabel::C4);
        assert_eq!(label(&directed_cycle(4)), FiberLabel::C4Arrow);
        assert_eq!(label(&complete(5)), FiberLabel::K5);
        assert_eq!(label(&undirected_cycle(5)), FiberLabel::C5);
        assert_eq!(label(&directed_cycle(5)), FiberLabel::C5Arrow);
        // F4: three perfect matchings as three edge colors on K4
        let f4 = Structure::colored_graph(
            4,
            vec![0; 4],
            &[(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)],
            &[0, 0, 1, 1, 2, 2],
        )
        .unwrap();
        assert_eq!(label(&f4), FiberLabel::F4);
    }

    #[test]
    fn size_two_class_is_k2() {
        // a 2-class with no internal edges yields the same abstract scheme
        let t = Structure::colored_graph(3, vec![0, 0, 1], &[(0, 2), (1, 2)], &[]).unwrap();
        let c = build_configuration(&t, 2, &cfg()).unwrap();
        let f = c.fiber_of(0);
        assert_eq!(classify_fiber(&c, f).unwrap(), FiberLabel::K2);
    }
}
