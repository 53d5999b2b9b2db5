//! Permutation groups and the isomorphism/automorphism engine for vertex-
//! and edge-colored structures. Arity >= 3 inputs are routed through the
//! tuple-incidence encoding; every answer is re-verified against the original
//! structure relation by relation.

mod encode;
mod ir;
mod perm;

pub use encode::{encode_kary_as_colored_graph, KaryEncoding};
pub use perm::{orbit_of, GeneratorSet, Permutation, StabilizerChain};

use std::collections::BTreeMap;

use crate::structures::{Structure, VertexId};
use crate::EngineConfig;
use ir::IrGraph;

#[derive(Debug, thiserror::Error)]
pub enum GroupsError {
    #[error("search budget exceeded after {nodes} nodes")]
    SearchBudgetExceeded { nodes: u64 },
    #[error(transparent)]
    Wl(#[from] crate::wl::WlError),
    #[error(transparent)]
    Structure(#[from] crate::structures::StructureError),
}

/// Joint refinement inputs are only strengthened with a 2-WL pass when the
/// structure is this small; the pass is isomorphism-invariant, so it prunes
/// without affecting answers.
const ESCALATE_MAX_VERTICES: usize = 600;

fn intern_pairs(values: Vec<(u64, u64)>) -> Vec<u32> {
    let mut sorted: Vec<(u64, u64)> = values.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let lookup: BTreeMap<(u64, u64), u32> = sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, i as u32))
        .collect();
    values.into_iter().map(|v| lookup[&v]).collect()
}

/// Raw, intern-ready vertex invariant: declared color plus unary-relation
/// membership pattern.
fn raw_vertex_keys(s: &Structure) -> Vec<u64> {
    let n = s.vertex_count();
    let mut keys: Vec<u64> = (0..n)
        .map(|v| s.vertex_color(v as VertexId) as u64)
        .collect();
    let mut shift = 33u32;
    for rel in s.relations().iter().filter(|r| r.arity == 1) {
        for t in rel.tuples() {
            keys[t[0] as usize] |= 1u64 << shift;
        }
        shift += 1;
        if shift >= 64 {
            break;
        }
    }
    keys
}

fn binary_rel_pairs(s: &Structure) -> Vec<Vec<(u32, u32)>> {
    s.relations()
        .iter()
        .filter(|r| r.arity == 2)
        .map(|r| r.pairs().collect())
        .collect()
}

fn build_ir_pair(
    a: &Structure,
    b: &Structure,
    cfg: &EngineConfig,
    escalate: bool,
) -> (IrGraph, IrGraph, usize) {
    let ka = raw_vertex_keys(a);
    let kb = raw_vertex_keys(b);
    // Optional 2-WL escalation on the disjoint union for extra pruning.
    let mut esc: Vec<(u64, u64)> = ka
        .iter()
        .map(|&k| (k, 0))
        .chain(kb.iter().map(|&k| (k, 0)))
        .collect();
    if escalate && a.vertex_count() + b.vertex_count() <= 2 * ESCALATE_MAX_VERTICES {
        if let Ok((union, off)) = a.disjoint_union(b) {
            if let Ok(col) = crate::wl::stable_coloring(&union, 2, cfg) {
                for v in 0..a.vertex_count() {
                    esc[v].1 = col.diagonal_color(v as u32) as u64;
                }
                for v in 0..b.vertex_count() {
                    esc[a.vertex_count() + v].1 = col.diagonal_color(off + v as u32) as u64;
                }
            }
        }
    }
    let colors = intern_pairs(esc);
    let count = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let (ca, cb) = colors.split_at(a.vertex_count());
    let ga = IrGraph::new(a.vertex_count(), ca.to_vec(), &binary_rel_pairs(a));
    let gb = IrGraph::new(b.vertex_count(), cb.to_vec(), &binary_rel_pairs(b));
    (ga, gb, count)
}

/// Direct relation-by-relation isomorphism check; always executed on every
/// candidate before it is returned anywhere.
pub fn verify_isomorphism(a: &Structure, b: &Structure, p: &Permutation) -> bool {
    if a.vertex_count() != b.vertex_count()
        || p.degree() != a.vertex_count()
        || a.signature() != b.signature()
        || a.is_directed() != b.is_directed()
    {
        return false;
    }
    for v in 0..a.vertex_count() as u32 {
        if b.vertex_color(p.apply(v)) != a.vertex_color(v) {
            return false;
        }
    }
    let mut image = Vec::new();
    for (ra, rb) in a.relations().iter().zip(b.relations().iter()) {
        if ra.len() != rb.len() {
            return false;
        }
        for t in ra.tuples() {
            image.clear();
            image.extend(t.iter().map(|&v| p.apply(v)));
            if !rb.contains(&image) {
                return false;
            }
        }
    }
    true
}

/// Above this many live vertices in the union, the search falls back to
/// plain color refinement per node instead of the incremental 2-WL table.
const PAIR_MODE_CAP: usize = 3600;

/// Sound and complete isomorphism test (complete up to the node budget,
/// exceeding which is an error, never a wrong answer).
///
/// After a joint refinement pass, vertices in singleton classes are pinned
/// and checked directly; the residual live cores are searched with an
/// incremental 2-WL pair table, which keeps CFI-style instances (where plain
/// refinement stalls) polynomial in practice.
pub fn isomorphic(
    a: &Structure,
    b: &Structure,
    cfg: &EngineConfig,
) -> Result<Option<Permutation>, GroupsError> {
    if a.vertex_count() != b.vertex_count()
        || a.signature() != b.signature()
        || a.is_directed() != b.is_directed()
    {
        return Ok(None);
    }
    let mut ca: Vec<u32> = a.vertex_colors().to_vec();
    let mut cb: Vec<u32> = b.vertex_colors().to_vec();
    ca.sort_unstable();
    cb.sort_unstable();
    if ca != cb {
        return Ok(None);
    }

    let ea = encode::encode_kary_as_colored_graph(a);
    let eb = encode::encode_kary_as_colored_graph(b);
    let wa = &ea.graph;
    let wb = &eb.graph;
    let n = wa.vertex_count();
    let ka = raw_vertex_keys(wa);
    let kb = raw_vertex_keys(wb);
    let joint: Vec<(u64, u64)> = ka
        .iter()
        .chain(kb.iter())
        .map(|&k| (k, 0))
        .collect();
    let colors = intern_pairs(joint);
    let mut count = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let (c1s, c2s) = colors.split_at(n);
    let ga = IrGraph::new(n, c1s.to_vec(), &binary_rel_pairs(wa));
    let gb = IrGraph::new(n, c2s.to_vec(), &binary_rel_pairs(wb));
    let mut c1 = ga.base_colors.clone();
    let mut c2 = gb.base_colors.clone();
    if !ir::joint_refine(&ga, &gb, &mut c1, &mut c2, &mut count) {
        return Ok(None);
    }

    let full_map: Option<Vec<u32>> = if count == n {
        // discrete: read the forced bijection off the classes
        let mut slot = vec![u32::MAX; count];
        for v in 0..n {
            slot[c2[v] as usize] = v as u32;
        }
        Some((0..n).map(|v| slot[c1[v] as usize]).collect())
    } else {
        // pin vertices in singleton classes and check their mutual edges
        let mut a_cnt = vec![0u32; count];
        let mut b_cnt = vec![0u32; count];
        for v in 0..n {
            a_cnt[c1[v] as usize] += 1;
            b_cnt[c2[v] as usize] += 1;
        }
        let mut pin = vec![u32::MAX; n];
        let mut b_of_color = vec![u32::MAX; count];
        for v in 0..n {
            if b_cnt[c2[v] as usize] == 1 {
                b_of_color[c2[v] as usize] = v as u32;
            }
        }
        for v in 0..n {
            if a_cnt[c1[v] as usize] == 1 {
                pin[v] = b_of_color[c1[v] as usize];
            }
        }
        let pinned_consistent = wa.relations().iter().zip(wb.relations()).all(|(ra, rb)| {
            ra.arity != 2
                || ra.tuples().all(|t| {
                    let (u, v) = (t[0] as usize, t[1] as usize);
                    if pin[u] == u32::MAX || pin[v] == u32::MAX {
                        true
                    } else {
                        rb.contains(&[pin[u], pin[v]])
                    }
                })
        });
        if !pinned_consistent {
            return Ok(None);
        }
        let live_a: Vec<u32> = (0..n as u32).filter(|&v| pin[v as usize] == u32::MAX).collect();
        let live_b: Vec<u32> = (0..n as u32)
            .filter(|&v| b_cnt[c2[v as usize] as usize] > 1)
            .collect();
        if live_a.len() != live_b.len() {
            return Ok(None);
        }
        let live_found = if live_a.len() + live_b.len() <= PAIR_MODE_CAP {
            pair_mode_search(wa, wb, &c1, &c2, &live_a, &live_b, cfg)?
        } else {
            let mut searcher = ir::Searcher::new(&ga, &gb, cfg.search_node_budget);
            let r = searcher
                .isomorphism(c1.clone(), c2.clone(), count)
                .map_err(|e| GroupsError::SearchBudgetExceeded { nodes: e.nodes })?;
            return finish_iso(a, b, &ea, r);
        };
        match live_found {
            None => None,
            Some(live_map) => {
                let mut full = pin;
                for (i, &v) in live_a.iter().enumerate() {
                    full[v as usize] = live_b[live_map[i] as usize];
                }
                Some(full)
            }
        }
    };
    finish_iso(a, b, &ea, full_map)
}

fn finish_iso(
    a: &Structure,
    b: &Structure,
    ea: &KaryEncoding,
    map: Option<Vec<u32>>,
) -> Result<Option<Permutation>, GroupsError> {
    let Some(map) = map else { return Ok(None) };
    let restricted: Vec<u32> = map[..ea.original_count].to_vec();
    let p = Permutation::from_images(restricted).expect("encoding maps originals to originals");
    assert!(
        verify_isomorphism(a, b, &p),
        "internal error: candidate isomorphism failed verification"
    );
    Ok(Some(p))
}

/// Search the live cores with an incremental 2-WL pair table over their
/// disjoint union.
fn pair_mode_search(
    wa: &Structure,
    wb: &Structure,
    c1: &[u32],
    c2: &[u32],
    live_a: &[u32],
    live_b: &[u32],
    cfg: &EngineConfig,
) -> Result<Option<Vec<u32>>, GroupsError> {
    let la = live_induced(wa, c1, live_a);
    let lb = live_induced(wb, c2, live_b);
    let (union, _off) = la.disjoint_union(&lb)?;
    let root = crate::wl::stable_coloring(&union, 2, cfg)?;
    let ga = IrGraph::new(la.vertex_count(), la.vertex_colors().to_vec(), &binary_rel_pairs(&la));
    let gb = IrGraph::new(lb.vertex_count(), lb.vertex_colors().to_vec(), &binary_rel_pairs(&lb));
    let mut searcher = ir::PairSearcher::new(&ga, &gb, cfg, cfg.search_node_budget);
    searcher
        .search(root.tuple_color, root.color_count)
        .map_err(|e| GroupsError::SearchBudgetExceeded { nodes: e.nodes })
}

/// Induced substructure on the live vertices, colored by their refined
/// classes (which already encode all adjacency to pinned vertices).
fn live_induced(w: &Structure, refined: &[u32], live: &[u32]) -> Structure {
    let mut back = vec![u32::MAX; w.vertex_count()];
    for (i, &v) in live.iter().enumerate() {
        back[v as usize] = i as u32;
    }
    let colors: Vec<u32> = live.iter().map(|&v| refined[v as usize]).collect();
    let relations: Vec<crate::structures::Relation> = w
        .relations()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.arity == 2)
        .map(|(ri, r)| {
            let pairs: Vec<(u32, u32)> = r
                .pairs()
                .filter(|&(u, v)| back[u as usize] != u32::MAX && back[v as usize] != u32::MAX)
                .map(|(u, v)| (back[u as usize], back[v as usize]))
                .collect();
            crate::structures::Relation::from_pairs(
                crate::structures::RelName::Named(format!("r{ri:06}")),
                pairs,
            )
        })
        .collect();
    Structure::new(live.len(), true, colors, relations).expect("live core is valid")
}

/// Generators of Aut(A) via stabilizer-chain individualization-refinement
/// with orbit pruning. Every generator is individually verified.
pub fn automorphism_generators(
    a: &Structure,
    cfg: &EngineConfig,
) -> Result<GeneratorSet, GroupsError> {
    automorphism_generators_opts(a, cfg, true)
}

/// As `automorphism_generators`, optionally without the 2-WL seeding pass
/// (graphs whose colors already carry the algebraic structure, like the
/// configuration encodings, refine fine without it).
pub fn automorphism_generators_opts(
    a: &Structure,
    cfg: &EngineConfig,
    escalate: bool,
) -> Result<GeneratorSet, GroupsError> {
    let enc = encode::encode_kary_as_colored_graph(a);
    let (g, _, _) = build_ir_pair(&enc.graph, &enc.graph, cfg, escalate);
    let raw = ir::automorphism_generators_ir(&g, cfg.search_node_budget)
        .map_err(|e| GroupsError::SearchBudgetExceeded { nodes: e.nodes })?;
    let mut gens = GeneratorSet::new(a.vertex_count());
    for p in raw.generators() {
        let restricted: Vec<u32> = p.images()[..a.vertex_count()].to_vec();
        let q = Permutation::from_images(restricted)
            .expect("encoding automorphism restricts to a bijection");
        assert!(
            verify_isomorphism(a, a, &q),
            "internal error: candidate automorphism failed verification"
        );
        gens.push(q);
    }
    Ok(gens)
}

/// Order of the generated group via a stabilizer chain.
pub fn group_order(gens: &GeneratorSet) -> u128 {
    StabilizerChain::build(gens).order()
}

/// Generators pairwise commute iff the generated group is abelian.
pub fn is_abelian(gens: &GeneratorSet) -> bool {
    let g = gens.generators();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            if !g[i].commutes_with(&g[j]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Structure;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    fn k3() -> Structure {
        Structure::simple_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    /// Factorial brute force over all vertex bijections.
    fn brute_isomorphic(a: &Structure, b: &Structure) -> bool {
        if a.vertex_count() != b.vertex_count() {
            return false;
        }
        let n = a.vertex_count();
        let mut images: Vec<u32> = (0..n as u32).collect();
        permute(&mut images, 0, &mut |imgs| {
            let p = Permutation::from_images(imgs.to_vec()).unwrap();
            verify_isomorphism(a, b, &p)
        })
    }

    fn brute_automorphism_count(a: &Structure) -> u128 {
        let n = a.vertex_count();
        let mut images: Vec<u32> = (0..n as u32).collect();
        let mut count = 0u128;
        permute(&mut images, 0, &mut |imgs| {
            let p = Permutation::from_images(imgs.to_vec()).unwrap();
            if verify_isomorphism(a, a, &p) {
                count += 1;
            }
            false
        });
        count
    }

    fn permute(v: &mut Vec<u32>, at: usize, f: &mut impl FnMut(&[u32]) -> bool) -> bool {
        if at == v.len() {
            return f(v);
        }
        for i in at..v.len() {
            v.swap(at, i);
            if permute(v, at + 1, f) {
                return true;
            }
            v.swap(at, i);
        }
        false
    }

    #[test]
    fn identity_on_self() {
        let s = k3();
        let p = isomorphic(&s, &s, &cfg()).unwrap().unwrap();
        assert!(verify_isomorphism(&s, &s, &p));
    }

    #[test]
    fn s3_on_triangle() {
        let gens = automorphism_generators(&k3(), &cfg()).unwrap();
        assert_eq!(group_order(&gens), 6);
        assert!(!is_abelian(&gens));
    }

    #[test]
    fn rigid_tree_has_no_automorphisms() {
        // three arms of pairwise distinct lengths at the degree-3 vertex
        let s =
            Structure::simple_graph(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6)]).unwrap();
        assert_eq!(brute_automorphism_count(&s), 1);
        let gens = automorphism_generators(&s, &cfg()).unwrap();
        assert!(gens.is_empty());
    }

    #[test]
    fn agrees_with_brute_force_small() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60u32 {
            let n = 4 + (trial as usize % 4);
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.gen_bool(0.45) {
                        edges.push((u, v));
                    }
                }
            }
            let colors: Vec<u32> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let a = Structure::colored_graph(n, colors, &edges, &[]).unwrap();
            let mut img: Vec<u32> = (0..n as u32).collect();
            img.shuffle(&mut rng);
            let b = a.relabel(&img);
            assert!(isomorphic(&a, &b, &cfg()).unwrap().is_some());
            assert!(brute_isomorphic(&a, &b));
            // flip one edge and compare against brute force again
            let u = rng.gen_range(0..n as u32);
            let v = (u + 1 + rng.gen_range(0..(n as u32 - 1))) % n as u32;
            let mut e2: Vec<(u32, u32)> = edges.clone();
            let norm = (u.min(v), u.max(v));
            if let Some(pos) = e2.iter().position(|&p| p == norm) {
                e2.remove(pos);
            } else {
                e2.push(norm);
            }
            let c = Structure::colored_graph(n, a.vertex_colors().to_vec(), &e2, &[]).unwrap();
            assert_eq!(
                isomorphic(&a, &c, &cfg()).unwrap().is_some(),
                brute_isomorphic(&a, &c)
            );
        }
    }

    #[test]
    fn automorphism_order_matches_brute_force() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40u32 {
            let n = 4 + (trial as usize % 5);
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.gen_bool(0.4) {
                        edges.push((u, v));
                    }
                }
            }
            let s = Structure::simple_graph(n, &edges).unwrap();
            let gens = automorphism_generators(&s, &cfg()).unwrap();
            for g in gens.generators() {
                assert!(verify_isomorphism(&s, &s, g));
            }
            assert_eq!(group_order(&gens), brute_automorphism_count(&s));
        }
    }

    #[test]
    fn ternary_structures_via_encoding() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = 5usize;
            let mut tuples = Vec::new();
            for _ in 0..4 {
                tuples.push(vec![
                    rng.gen_range(0..n as u32),
                    rng.gen_range(0..n as u32),
                    rng.gen_range(0..n as u32),
                ]);
            }
            let rel = crate::structures::Relation::new(
                crate::structures::RelName::Named("t".into()),
                3,
                tuples,
            );
            let a = Structure::new(n, true, vec![0; n], vec![rel]).unwrap();
            let mut img: Vec<u32> = (0..n as u32).collect();
            img.shuffle(&mut rng);
            let b = a.relabel(&img);
            let found = isomorphic(&a, &b, &cfg()).unwrap();
            assert!(found.is_some());
            assert!(verify_isomorphism(&a, &b, &found.unwrap()));
        }
    }
}
