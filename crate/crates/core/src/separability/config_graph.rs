//! Encoding the algebra of a coherent configuration into a bounded-color
//! graph whose automorphisms are exactly the strict algebraic automorphisms:
//! one vertex per basis relation, one per compatible relation tuple, with
//! edges labeled by intersection numbers and component-coincidence sets.

use std::collections::BTreeMap;

use super::SepError;
use crate::coherent::Configuration;
use crate::groups::{self, GeneratorSet, Permutation};
use crate::structures::{RelName, Relation, Structure};
use crate::EngineConfig;

pub struct ConfigGraphEncoding {
    pub graph: Structure,
    /// The first `relation_count` vertices of `graph` stand for the basis
    /// relations, in id order.
    pub relation_count: usize,
}

/// Builds G_C. Relation vertices are colored by (fiber tuple, equality type);
/// tuple vertices by their component colors; incidences carry a composite
/// edge color (intersection number, coincidence mask).
pub fn encode_config_graph(c: &Configuration) -> ConfigGraphEncoding {
    let m = c.relation_count;
    let compat = c.compatible_tuples();
    // relation vertex colors
    let mut rel_keys: Vec<(Vec<u32>, Vec<u8>)> = (0..m as u32)
        .map(|r| (c.relation_fibers(r).to_vec(), c.eq_type(r).to_vec()))
        .collect();
    let mut rel_palette = rel_keys.clone();
    rel_palette.sort();
    rel_palette.dedup();
    let rel_color = |key: &(Vec<u32>, Vec<u8>)| rel_palette.binary_search(key).unwrap() as u32;

    // tuple vertices: distinct compatible tuples
    let mut tuples: Vec<Vec<u32>> = compat.iter().map(|(_, p, _)| p.clone()).collect();
    tuples.sort();
    tuples.dedup();
    let tuple_index: BTreeMap<&[u32], u32> = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_slice(), m as u32 + i as u32))
        .collect();
    // tuple vertex colors: tuple of component relation colors
    let mut tup_keys: Vec<Vec<u32>> = tuples
        .iter()
        .map(|t| t.iter().map(|&r| rel_color(&rel_keys[r as usize])).collect())
        .collect();
    let mut tup_palette = tup_keys.clone();
    tup_palette.sort();
    tup_palette.dedup();
    let tup_base = rel_palette.len() as u32;

    let mut colors: Vec<u32> = Vec::with_capacity(m + tuples.len());
    for key in rel_keys.drain(..) {
        colors.push(rel_color(&key));
    }
    for key in tup_keys.drain(..) {
        colors.push(tup_base + tup_palette.binary_search(&key).unwrap() as u32);
    }

    // edges: (relation, tuple) incidences with composite labels
    let mut incidence: BTreeMap<(u32, u32), (u64, u16)> = BTreeMap::new();
    for (r, pattern, count) in &compat {
        let t = tuple_index[pattern.as_slice()];
        incidence.entry((*r, t)).or_insert((0, 0)).0 = *count;
    }
    for (pattern, &t) in tuple_index.iter().map(|(p, t)| (*p, t)) {
        for (i, &r) in pattern.iter().enumerate() {
            incidence.entry((r, t)).or_insert((0, 0)).1 |= 1 << i;
        }
    }
    let mut labels: Vec<(u64, u16)> = incidence.values().copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let mut by_color: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for ((r, t), label) in incidence {
        let color = labels.binary_search(&label).unwrap() as u32;
        let e = by_color.entry(color).or_default();
        e.push((r, t));
        e.push((t, r));
    }
    let relations: Vec<Relation> = by_color
        .into_iter()
        .map(|(color, pairs)| Relation::from_pairs(RelName::Edge(color), pairs))
        .collect();
    let graph = Structure::new(m + tuples.len(), false, colors, relations)
        .expect("encoding is a valid structure");
    ConfigGraphEncoding {
        graph,
        relation_count: m,
    }
}

/// Checks that `map` is a strict algebraic automorphism of `c`: bijective on
/// relation ids, fiber-tuples and equality types fixed, closed under index
/// permutations, and intersection-number preserving on every memoized entry
/// plus the full compatible-tuple list.
pub fn verify_strict_algebraic_auto(c: &Configuration, map: &[u32]) -> Result<(), SepError> {
    let m = c.relation_count;
    if map.len() != m {
        return Err(SepError::Internal("map degree mismatch".into()));
    }
    let mut seen = vec![false; m];
    for &t in map {
        if t as usize >= m || seen[t as usize] {
            return Err(SepError::Internal("map is not a bijection".into()));
        }
        seen[t as usize] = true;
    }
    for r in 0..m as u32 {
        let fr = map[r as usize];
        if c.eq_type(r) != c.eq_type(fr) {
            return Err(SepError::Internal(format!(
                "equality type not preserved at relation {r}"
            )));
        }
        if c.relation_fibers(r) != c.relation_fibers(fr) {
            return Err(SepError::Internal(format!(
                "map is not strict at relation {r}"
            )));
        }
    }
    // (A2) on generating transpositions
    for t in 0..c.k.saturating_sub(1) {
        let mut sigma: Vec<usize> = (0..c.k).collect();
        sigma.swap(t, t + 1);
        for r in 0..m as u32 {
            let lhs = map[c.sigma_action(r, &sigma) as usize];
            let rhs = c.sigma_action(map[r as usize], &sigma);
            if lhs != rhs {
                return Err(SepError::Internal(format!(
                    "index permutation action not preserved at relation {r}"
                )));
            }
        }
    }
    // (A3) on every discovered entry
    for (r, pattern, count) in c.compatible_tuples() {
        let fp: Vec<u32> = pattern.iter().map(|&x| map[x as usize]).collect();
        let img = c.intersection_number(map[r as usize], &fp);
        if img != count {
            return Err(SepError::Internal(format!(
                "intersection number not preserved: p({r};{pattern:?})={count} vs {img}"
            )));
        }
    }
    Ok(())
}

/// Generators of the strict algebraic automorphism group, via the
/// automorphism group of the encoding graph restricted to relation vertices.
/// Every generator is re-verified.
pub fn strict_algebraic_autos(
    c: &Configuration,
    cfg: &EngineConfig,
) -> Result<GeneratorSet, SepError> {
    let enc = encode_config_graph(c);
    let raw = groups::automorphism_generators_opts(&enc.graph, cfg, false)?;
    let mut gens = GeneratorSet::new(c.relation_count);
    for g in raw.generators() {
        let restricted: Vec<u32> = g.images()[..enc.relation_count].to_vec();
        let p = Permutation::from_images(restricted)
            .expect("relation vertices map among themselves");
        verify_strict_algebraic_auto(c, p.images())?;
        gens.push(p);
    }
    Ok(gens)
}

/// Fibers grouped into components connected by non-uniform interspaces.
/// Strict algebraic automorphisms fix every uniform cross relation, so they
/// decompose as products over these components, and a product is induced by
/// a combinatorial automorphism iff every factor is.
pub fn uniform_components(c: &Configuration) -> Vec<Vec<u32>> {
    let nf = c.fiber_count();
    let mut parent: Vec<usize> = (0..nf).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for x in 0..nf as u32 {
        for y in (x + 1)..nf as u32 {
            if c.interspace(x, y).len() > 1 {
                let (a, b) = (find(&mut parent, x as usize), find(&mut parent, y as usize));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for f in 0..nf {
        groups.entry(find(&mut parent, f)).or_default().push(f as u32);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::build_configuration;
    use crate::gen::BaseGraph;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    /// Brute-force enumeration of strict algebraic automorphisms for tiny
    /// configurations: all fiber- and eq-type-preserving relation bijections
    /// that preserve every intersection number.
    fn brute_strict_autos(c: &Configuration) -> Vec<Vec<u32>> {
        let m = c.relation_count;
        let mut out = Vec::new();
        let mut map: Vec<u32> = vec![u32::MAX; m];
        let mut used = vec![false; m];
        fn rec(
            c: &Configuration,
            map: &mut Vec<u32>,
            used: &mut Vec<bool>,
            at: usize,
            out: &mut Vec<Vec<u32>>,
        ) {
            let m = c.relation_count;
            if at == m {
                if verify_strict_algebraic_auto(c, map).is_ok() {
                    out.push(map.clone());
                }
                return;
            }
            for t in 0..m as u32 {
                if used[t as usize] {
                    continue;
                }
                if c.relation_fibers(at as u32) != c.relation_fibers(t)
                    || c.eq_type(at as u32) != c.eq_type(t)
                {
                    continue;
                }
                map[at] = t;
                used[t as usize] = true;
                rec(c, map, used, at + 1, out);
                used[t as usize] = false;
            }
            map[at] = u32::MAX;
        }
        rec(c, &mut map, &mut used, 0, &mut out);
        out
    }

    #[test]
    fn k3_strict_autos_match_brute_force() {
        let c = build_configuration(&BaseGraph::complete(3).to_structure(), 2, &cfg()).unwrap();
        let gens = strict_algebraic_autos(&c, &cfg()).unwrap();
        let brute = brute_strict_autos(&c);
        let order = groups::group_order(&gens);
        assert_eq!(order, brute.len() as u128);
    }

    #[test]
    fn c5_scheme_has_the_pentagon_pentagram_swap() {
        // the two non-identity relations of the 5-cycle scheme have equal
        // parameters, so swapping them is a strict algebraic automorphism
        let c = build_configuration(&BaseGraph::cycle(5).to_structure(), 2, &cfg()).unwrap();
        assert_eq!(c.relation_count, 3);
        let gens = strict_algebraic_autos(&c, &cfg()).unwrap();
        let brute = brute_strict_autos(&c);
        assert_eq!(brute.len(), 2, "identity and the swap");
        assert_eq!(groups::group_order(&gens), 2);
    }

    #[test]
    fn singleton_fibers_force_identity() {
        let s = Structure::colored_graph(3, vec![0, 1, 2], &[(0, 1), (1, 2)], &[]).unwrap();
        let c = build_configuration(&s, 2, &cfg()).unwrap();
        let gens = strict_algebraic_autos(&c, &cfg()).unwrap();
        assert!(gens.is_empty());
    }

    #[test]
    fn components_split_on_uniform_interspaces() {
        // two independent matched pairs with unrelated palettes: the cross
        // interspaces are uniform
        let s = Structure::colored_graph(
            4,
            vec![0, 0, 1, 1],
            &[(0, 1), (2, 3)],
            &[],
        )
        .unwrap();
        let c = build_configuration(&s, 2, &cfg()).unwrap();
        let comps = uniform_components(&c);
        assert_eq!(comps.len(), 2);
    }
}
