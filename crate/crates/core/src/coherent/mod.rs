//! k-ary coherent configurations: the stable partition of V^k packaged with
//! fibers, faces, interspaces and intersection numbers, plus the axiom
//! checkers ((R1) equality types, (R2) index-permutation closure, (C)
//! well-defined intersection numbers).

mod catalog;
mod stars;

pub use catalog::{classify_fiber, classify_interspace, FiberLabel, InterspaceType};
pub(crate) use stars::{attach_star_keyed, eliminate_all_stars, AttachOutput};
pub use stars::{attach_star, eliminate_star, find_star, functional_image, StarRecord};

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::structures::{ColorId, Structure, VertexId};
use crate::wl::{self, StableColoring, TupleSpace, WlError};
use crate::EngineConfig;

#[derive(Debug, thiserror::Error)]
pub enum CoherentError {
    #[error("input partition is not a rainbow: {0}")]
    NotARainbow(String),
    #[error("relation is not a disjoint union of stars")]
    NotAStar,
    #[error("relation is not functional")]
    NotFunctional,
    #[error("equivalence input invalid: {0}")]
    NotAnEquivalence(String),
    #[error("coherence violated: {0}")]
    CoherenceViolation(String),
    #[error("fiber of order {0} exceeds the catalog bound 5")]
    FiberTooLarge(usize),
    #[error("fiber does not match any catalog entry: {0}")]
    UnknownType(String),
    #[error(transparent)]
    Wl(#[from] WlError),
}

/// Exhaustive coherence checking is affordable up to this many tuples
/// (the check itself costs n^k * n).
pub const EXHAUSTIVE_TUPLE_CAP: usize = 100_000;

/// A k-ary coherent configuration over a dense relation table.
pub struct Configuration {
    pub k: usize,
    pub n: usize,
    /// relation id per tuple index (dense ids 0..relation_count)
    pub table: Vec<ColorId>,
    pub relation_count: usize,
    /// Original vertex names: restrictions and extensions track where each
    /// current vertex came from (freshly built configurations use identity).
    pub vertex_labels: Vec<u32>,
    reps: Vec<u32>,
    rel_sizes: Vec<u32>,
    fiber_of: Vec<u32>,
    fiber_members: Vec<Vec<VertexId>>,
    /// fiber of each component, per relation
    rel_fibers: Vec<Vec<u32>>,
    /// canonical equality type per relation: for each position, the first
    /// position holding an equal vertex
    eq_types: Vec<Vec<u8>>,
    /// 2-skeleton: dense binary relation id of (u, v, v, ..., v)
    pair_rel: Vec<u32>,
    pair_rel_count: usize,
    /// per binary relation: (fiber of u, fiber of v, pair count)
    pair_fibers: Vec<(u32, u32, u32)>,
    memo: Mutex<BTreeMap<(u32, Vec<u32>), u64>>,
}

impl Configuration {
    pub fn space(&self) -> TupleSpace {
        TupleSpace::new(self.n, self.k).expect("validated on construction")
    }

    /// Wraps a dense tuple table (ids are renumbered to be dense in order of
    /// first occurrence if necessary). Derives fibers, representatives, the
    /// 2-skeleton, and equality types. Does not check the axioms.
    pub fn from_table(
        n: usize,
        k: usize,
        mut table: Vec<ColorId>,
        vertex_labels: Option<Vec<u32>>,
    ) -> Configuration {
        let space = TupleSpace::new(n, k).expect("supported k");
        assert_eq!(table.len(), space.size);
        // densify ids ascending by old id; a table that is already dense
        // keeps its ids verbatim
        let max_id = table.iter().copied().max().map(|m| m as usize + 1).unwrap_or(0);
        let mut present = vec![false; max_id];
        for &c in &table {
            present[c as usize] = true;
        }
        let mut rank = vec![u32::MAX; max_id];
        let mut relation_count = 0usize;
        for (old, &p) in present.iter().enumerate() {
            if p {
                rank[old] = relation_count as u32;
                relation_count += 1;
            }
        }
        let mut reps: Vec<u32> = vec![u32::MAX; relation_count];
        for (idx, c) in table.iter_mut().enumerate() {
            *c = rank[*c as usize];
            if reps[*c as usize] == u32::MAX {
                reps[*c as usize] = idx as u32;
            }
        }
        let mut rel_sizes = vec![0u32; relation_count];
        for &c in &table {
            rel_sizes[c as usize] += 1;
        }

        // fibers from the diagonal
        let mut fiber_of = vec![0u32; n];
        let mut fiber_ids: BTreeMap<u32, u32> = BTreeMap::new();
        for v in 0..n {
            let c = table[space.diagonal(v as u32)];
            let next = fiber_ids.len() as u32;
            let id = *fiber_ids.entry(c).or_insert(next);
            fiber_of[v] = id;
        }
        let fiber_count = fiber_ids.len();
        let mut fiber_members: Vec<Vec<VertexId>> = vec![Vec::new(); fiber_count];
        for v in 0..n {
            fiber_members[fiber_of[v] as usize].push(v as u32);
        }

        // 2-skeleton; for k = 2 binary ids coincide with table ids
        let (pair_rel, pair_rel_count) = if k == 2 {
            (table.clone(), relation_count)
        } else {
            let mut pair_rel = vec![0u32; n * n];
            let mut pair_ids: BTreeMap<u32, u32> = BTreeMap::new();
            for u in 0..n {
                for v in 0..n {
                    let c = table[space.pair(u as u32, v as u32)];
                    let next = pair_ids.len() as u32;
                    let id = *pair_ids.entry(c).or_insert(next);
                    pair_rel[u * n + v] = id;
                }
            }
            (pair_rel, pair_ids.len())
        };
        let mut pair_fibers = vec![(u32::MAX, u32::MAX, 0u32); pair_rel_count];
        for u in 0..n {
            for v in 0..n {
                let id = pair_rel[u * n + v] as usize;
                pair_fibers[id].0 = fiber_of[u];
                pair_fibers[id].1 = fiber_of[v];
                pair_fibers[id].2 += 1;
            }
        }

        // per-relation equality type and component fibers from representatives
        let mut eq_types = Vec::with_capacity(relation_count);
        let mut rel_fibers = Vec::with_capacity(relation_count);
        let mut tuple = [0 as VertexId; crate::K_MAX];
        for &rep in &reps {
            space.decode(rep as usize, &mut tuple[..k]);
            let mut eq = vec![0u8; k];
            for i in 0..k {
                eq[i] = (0..=i).find(|&j| tuple[j] == tuple[i]).unwrap() as u8;
            }
            eq_types.push(eq);
            rel_fibers.push((0..k).map(|i| fiber_of[tuple[i] as usize]).collect());
        }

        Configuration {
            k,
            n,
            table,
            relation_count,
            vertex_labels: vertex_labels.unwrap_or_else(|| (0..n as u32).collect()),
            reps,
            rel_sizes,
            fiber_of,
            fiber_members,
            rel_fibers,
            eq_types,
            pair_rel,
            pair_rel_count,
            pair_fibers,
            memo: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn from_coloring(col: &StableColoring) -> Configuration {
        Configuration::from_table(col.n, col.k, col.tuple_color.clone(), None)
    }

    pub fn fiber_count(&self) -> usize {
        self.fiber_members.len()
    }

    pub fn fiber_of(&self, v: VertexId) -> u32 {
        self.fiber_of[v as usize]
    }

    pub fn fiber_members(&self, fiber: u32) -> &[VertexId] {
        &self.fiber_members[fiber as usize]
    }

    pub fn relation_size(&self, rel: u32) -> u32 {
        self.rel_sizes[rel as usize]
    }

    pub fn representative(&self, rel: u32) -> Vec<VertexId> {
        let mut tuple = vec![0; self.k];
        self.space().decode(self.reps[rel as usize] as usize, &mut tuple);
        tuple
    }

    pub fn eq_type(&self, rel: u32) -> &[u8] {
        &self.eq_types[rel as usize]
    }

    /// Fibers of the components of `rel` (the 1-faces).
    pub fn relation_fibers(&self, rel: u32) -> &[u32] {
        &self.rel_fibers[rel as usize]
    }

    /// Dense binary relation id of the ordered pair (u, v) in the 2-skeleton.
    pub fn pair_relation(&self, u: VertexId, v: VertexId) -> u32 {
        self.pair_rel[u as usize * self.n + v as usize]
    }

    pub fn pair_relation_count(&self) -> usize {
        self.pair_rel_count
    }

    /// (source fiber, target fiber, pair count) of a binary relation.
    pub fn pair_relation_info(&self, rel2: u32) -> (u32, u32, u32) {
        self.pair_fibers[rel2 as usize]
    }

    /// Distinct binary relations of the interspace X x Y, ascending.
    pub fn interspace(&self, x: u32, y: u32) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::new();
        for &u in &self.fiber_members[x as usize] {
            for &v in &self.fiber_members[y as usize] {
                let r = self.pair_relation(u, v);
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Face of `rel` on the index set `indices` (ascending, non-empty), as a
    /// full-table color of the padded projection. Well-defined by axiom (C).
    pub fn face_color(&self, rel: u32, indices: &[usize]) -> ColorId {
        let space = self.space();
        let rep = self.representative(rel);
        let mut padded = vec![rep[*indices.last().unwrap()]; self.k];
        for (slot, &i) in indices.iter().enumerate() {
            padded[slot] = rep[i];
        }
        self.table[space.index(&padded)]
    }

    /// Image of `rel` under an index permutation sigma (R^sigma contains the
    /// tuples (x_{sigma(1)}, ..., x_{sigma(k)})).
    pub fn sigma_action(&self, rel: u32, sigma: &[usize]) -> ColorId {
        let space = self.space();
        let rep = self.representative(rel);
        let permuted: Vec<VertexId> = (0..self.k).map(|i| rep[sigma[i]]).collect();
        self.table[space.index(&permuted)]
    }

    /// Intersection number p(rel; ts[0], ..., ts[k-1]) computed from the
    /// representative and memoized.
    pub fn intersection_number(&self, rel: u32, ts: &[ColorId]) -> u64 {
        assert_eq!(ts.len(), self.k);
        let key = (rel, ts.to_vec());
        if let Some(&v) = self.memo.lock().unwrap().get(&key) {
            return v;
        }
        let v = self.intersection_from(self.reps[rel as usize], ts);
        self.memo.lock().unwrap().insert(key, v);
        v
    }

    fn intersection_from(&self, idx: u32, ts: &[ColorId]) -> u64 {
        let space = self.space();
        let mut tuple = [0 as VertexId; crate::K_MAX];
        space.decode(idx as usize, &mut tuple[..self.k]);
        let mut count = 0u64;
        for y in 0..self.n as u32 {
            let mut ok = true;
            for i in 0..self.k {
                if self.table[space.substitute(idx as usize, i, tuple[i], y)] != ts[i] {
                    ok = false;
                    break;
                }
            }
            if ok {
                count += 1;
            }
        }
        count
    }

    /// All entries computed so far (used to re-verify algebraic maps).
    pub fn memoized_entries(&self) -> Vec<((u32, Vec<u32>), u64)> {
        self.memo
            .lock()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect()
    }

    /// Compatible k-tuples of relations: all (rel of x[i<-y])_i patterns with
    /// a positive intersection number from some relation, discovered by
    /// enumerating one representative per relation against every y. Returns
    /// (source rel, tuple of rels, count) triples, deterministically ordered.
    pub fn compatible_tuples(&self) -> Vec<(u32, Vec<u32>, u64)> {
        let space = self.space();
        let mut out: BTreeMap<(u32, Vec<u32>), u64> = BTreeMap::new();
        let mut tuple = [0 as VertexId; crate::K_MAX];
        for rel in 0..self.relation_count as u32 {
            let idx = self.reps[rel as usize];
            space.decode(idx as usize, &mut tuple[..self.k]);
            for y in 0..self.n as u32 {
                let pattern: Vec<u32> = (0..self.k)
                    .map(|i| self.table[space.substitute(idx as usize, i, tuple[i], y)])
                    .collect();
                *out.entry((rel, pattern)).or_insert(0) += 1;
            }
        }
        let mut memo = self.memo.lock().unwrap();
        for ((rel, pat), count) in &out {
            memo.insert((*rel, pat.clone()), *count);
        }
        out.into_iter().map(|((r, p), c)| (r, p, c)).collect()
    }

    /// (R1): all tuples of a relation share its equality type.
    pub fn check_equality_types(&self) -> Result<(), CoherentError> {
        let space = self.space();
        let mut tuple = [0 as VertexId; crate::K_MAX];
        for idx in 0..space.size {
            space.decode(idx, &mut tuple[..self.k]);
            let eq = &self.eq_types[self.table[idx] as usize];
            for i in 0..self.k {
                let first = (0..=i).find(|&j| tuple[j] == tuple[i]).unwrap() as u8;
                if eq[i] != first {
                    return Err(CoherentError::NotARainbow(format!(
                        "equality type differs inside relation {}",
                        self.table[idx]
                    )));
                }
            }
        }
        Ok(())
    }

    /// (R2): the partition is closed under index permutations (checked on the
    /// generating transpositions).
    pub fn check_permutation_closure(&self) -> Result<(), CoherentError> {
        let space = self.space();
        let mut tuple = [0 as VertexId; crate::K_MAX];
        for t in 0..self.k.saturating_sub(1) {
            let mut action = vec![u32::MAX; self.relation_count];
            for idx in 0..space.size {
                space.decode(idx, &mut tuple[..self.k]);
                tuple.swap(t, t + 1);
                let sigma_idx = space.index(&tuple[..self.k]);
                tuple.swap(t, t + 1);
                let src = self.table[idx] as usize;
                let dst = self.table[sigma_idx];
                if action[src] == u32::MAX {
                    action[src] = dst;
                } else if action[src] != dst {
                    return Err(CoherentError::NotARainbow(format!(
                        "relation {src} not closed under transposition {t}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// (C): intersection numbers do not depend on the representative.
    /// Exhaustive when n^k is small, otherwise deterministic spot checks.
    pub fn check_coherence(&self) -> Result<(), CoherentError> {
        let space = self.space();
        if space.size <= EXHAUSTIVE_TUPLE_CAP {
            return self.check_coherence_exhaustive();
        }
        // sampled: compare a few members per relation against the rep
        let mut tuple = [0 as VertexId; crate::K_MAX];
        for rel in 0..self.relation_count as u32 {
            let rep_sig = self.round_signature(self.reps[rel as usize]);
            let mut checked = 0;
            let step = (space.size / 97).max(1);
            let mut idx = rel as usize % step;
            while idx < space.size && checked < 3 {
                if self.table[idx] == rel {
                    space.decode(idx, &mut tuple[..self.k]);
                    if self.round_signature(idx as u32) != rep_sig {
                        return Err(CoherentError::CoherenceViolation(format!(
                            "relation {rel} has non-constant intersection numbers"
                        )));
                    }
                    checked += 1;
                }
                idx += step;
            }
        }
        Ok(())
    }

    pub fn check_coherence_exhaustive(&self) -> Result<(), CoherentError> {
        use rayon::prelude::*;
        let space = self.space();
        let rep_sigs: Vec<Vec<u128>> = (0..self.relation_count)
            .map(|r| self.round_signature(self.reps[r]))
            .collect();
        let bad = (0..space.size)
            .into_par_iter()
            .find_any(|&idx| self.round_signature(idx as u32) != rep_sigs[self.table[idx] as usize]);
        match bad {
            Some(idx) => Err(CoherentError::CoherenceViolation(format!(
                "tuple {idx} disagrees with its relation's intersection numbers"
            ))),
            None => Ok(()),
        }
    }

    /// Sorted multiset of substitution patterns of one tuple: the quantity
    /// axiom (C) requires to be constant on each relation.
    fn round_signature(&self, idx: u32) -> Vec<u128> {
        let space = self.space();
        let mut tuple = [0 as VertexId; crate::K_MAX];
        space.decode(idx as usize, &mut tuple[..self.k]);
        let mut items: Vec<u128> = (0..self.n as u32)
            .map(|y| {
                let mut item = 0u128;
                for i in 0..self.k {
                    let j = space.substitute(idx as usize, i, tuple[i], y);
                    item = (item << 32) | self.table[j] as u128;
                }
                item
            })
            .collect();
        items.sort_unstable();
        items
    }

    pub fn check_axioms(&self) -> Result<(), CoherentError> {
        self.check_equality_types()?;
        self.check_permutation_closure()?;
        self.check_coherence()
    }

    /// Restriction to the vertices with `keep[v]` set (a union of fibers).
    /// Relation ids are renumbered dense, ascending by old id.
    pub(crate) fn restrict(&self, keep: &[bool]) -> Configuration {
        let kept: Vec<u32> = (0..self.n as u32).filter(|&v| keep[v as usize]).collect();
        let m = kept.len();
        let old_space = self.space();
        let new_space = TupleSpace::new(m, self.k).expect("supported k");
        let mut table = vec![0u32; new_space.size];
        let mut tuple = vec![0u32; self.k];
        for idx in 0..new_space.size {
            new_space.decode(idx, &mut tuple);
            let old_idx = old_space.index(
                &tuple
                    .iter()
                    .map(|&v| kept[v as usize])
                    .collect::<Vec<_>>(),
            );
            table[idx] = self.table[old_idx];
        }
        let labels: Vec<u32> = kept
            .iter()
            .map(|&v| self.vertex_labels[v as usize])
            .collect();
        Configuration::from_table(m, self.k, table, Some(labels))
    }

    /// The l-skeleton as a standalone l-ary configuration (same vertex set).
    pub fn skeleton(&self, l: usize) -> Configuration {
        assert!(l >= 1 && l <= self.k);
        if l == self.k {
            return Configuration::from_table(
                self.n,
                self.k,
                self.table.clone(),
                Some(self.vertex_labels.clone()),
            );
        }
        let space = self.space();
        let sub = TupleSpace::new(self.n, l).expect("supported l");
        let mut table = vec![0u32; sub.size];
        let mut tuple = vec![0u32; l];
        for idx in 0..sub.size {
            sub.decode(idx, &mut tuple);
            let mut padded = vec![tuple[l - 1]; self.k];
            padded[..l].copy_from_slice(&tuple);
            table[idx] = self.table[space.index(&padded)];
        }
        Configuration::from_table(self.n, l, table, Some(self.vertex_labels.clone()))
    }

    /// True when the two configurations induce the same partition of V^k.
    pub fn same_partition(&self, other: &Configuration) -> bool {
        if self.n != other.n || self.k != other.k {
            return false;
        }
        if self.relation_count != other.relation_count {
            return false;
        }
        let mut fwd = vec![u32::MAX; self.relation_count];
        let mut bwd = vec![u32::MAX; other.relation_count];
        for (&a, &b) in self.table.iter().zip(other.table.iter()) {
            if fwd[a as usize] == u32::MAX {
                fwd[a as usize] = b;
            } else if fwd[a as usize] != b {
                return false;
            }
            if bwd[b as usize] == u32::MAX {
                bwd[b as usize] = a;
            } else if bwd[b as usize] != a {
                return false;
            }
        }
        true
    }

    /// Debug dump: one line per relation for golden tests.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for rel in 0..self.relation_count as u32 {
            write!(out, "R {rel} eqtype").unwrap();
            for &e in self.eq_type(rel) {
                write!(out, " {e}").unwrap();
            }
            write!(out, " fibers").unwrap();
            for &f in self.relation_fibers(rel) {
                write!(out, " {f}").unwrap();
            }
            write!(out, " faces").unwrap();
            for i in 0..self.k {
                for j in i + 1..self.k {
                    write!(out, " {}", self.face_color(rel, &[i, j])).unwrap();
                }
            }
            writeln!(out, " size {}", self.relation_size(rel)).unwrap();
        }
        out
    }
}

/// Builds CC^k(S): the configuration of the WL[k] stable coloring, with the
/// axioms verified (exhaustively for small tuple tables).
pub fn build_configuration(
    s: &Structure,
    k: usize,
    cfg: &EngineConfig,
) -> Result<Configuration, CoherentError> {
    let col = wl::stable_coloring(s, k, cfg)?;
    let c = Configuration::from_coloring(&col);
    c.check_axioms()?;
    Ok(c)
}

/// The coherent closure of an arbitrary rainbow given as a tuple table:
/// validates (R1)/(R2), then refines to the stable partition.
pub fn coherent_closure(
    n: usize,
    k: usize,
    rainbow: &[ColorId],
    cfg: &EngineConfig,
) -> Result<Configuration, CoherentError> {
    let seed = Configuration::from_table(n, k, rainbow.to_vec(), None);
    seed.check_equality_types()
        .map_err(|_| CoherentError::NotARainbow("equality types not respected".into()))?;
    seed.check_permutation_closure()
        .map_err(|_| CoherentError::NotARainbow("not closed under index permutations".into()))?;
    let col = wl::refine_partition(n, k, rainbow, cfg)?;
    let c = Configuration::from_coloring(&col);
    c.check_axioms()?;
    Ok(c)
}

/// Coherent closure of the l-skeleton, lifted back to arity k: the seed
/// partitions V^k by the skeleton relations of all index-pair projections.
/// A configuration is l-induced iff this reproduces it.
pub fn closure_of_skeleton(
    c: &Configuration,
    l: usize,
    cfg: &EngineConfig,
) -> Result<Configuration, CoherentError> {
    assert!(l == 2, "only the 2-skeleton lift is needed");
    let space = c.space();
    let mut seed = vec![0u32; space.size];
    let mut tuple = vec![0u32; c.k];
    let mut dict: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    for idx in 0..space.size {
        space.decode(idx, &mut tuple);
        let mut key = Vec::with_capacity(c.k * (c.k - 1) / 2);
        for i in 0..c.k {
            for j in i + 1..c.k {
                key.push(c.pair_relation(tuple[i], tuple[j]));
            }
        }
        if c.k == 1 {
            key.push(c.fiber_of(tuple[0]));
        }
        let next = dict.len() as u32;
        seed[idx] = *dict.entry(key).or_insert(next);
    }
    let col = wl::refine_partition(c.n, c.k, &seed, cfg)?;
    Ok(Configuration::from_coloring(&col))
}

/// Thin fiber: every binary relation inside X is a perfect matching or a
/// permutation (in- and out-degree exactly one everywhere).
pub fn is_thin_fiber(c: &Configuration, fiber: u32) -> bool {
    let members = c.fiber_members(fiber);
    let mut per_rel: BTreeMap<u32, (BTreeMap<u32, u32>, BTreeMap<u32, u32>)> = BTreeMap::new();
    for &u in members {
        for &v in members {
            let r = c.pair_relation(u, v);
            let entry = per_rel.entry(r).or_default();
            *entry.0.entry(u).or_insert(0) += 1;
            *entry.1.entry(v).or_insert(0) += 1;
        }
    }
    per_rel.values().all(|(out, inn)| {
        out.len() == members.len()
            && inn.len() == members.len()
            && out.values().all(|&d| d == 1)
            && inn.values().all(|&d| d == 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    fn k3() -> Structure {
        Structure::simple_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn k3_configuration() {
        let c = build_configuration(&k3(), 2, &cfg()).unwrap();
        assert_eq!(c.relation_count, 2);
        assert_eq!(c.fiber_count(), 1);
        assert!(c.check_coherence_exhaustive().is_ok());
    }

    #[test]
    fn directed_triangle_three_relations() {
        // identity, forward, backward
        let s = Structure::new(
            3,
            true,
            vec![0, 0, 0],
            vec![crate::structures::Relation::from_pairs(
                crate::structures::RelName::Edge(0),
                vec![(0, 1), (1, 2), (2, 0)],
            )],
        )
        .unwrap();
        let c = build_configuration(&s, 2, &cfg()).unwrap();
        assert_eq!(c.relation_count, 3);
        assert_eq!(c.fiber_count(), 1);
    }

    #[test]
    fn closure_of_already_coherent_is_identity() {
        let c = build_configuration(&k3(), 2, &cfg()).unwrap();
        let closed = coherent_closure(c.n, c.k, &c.table, &cfg()).unwrap();
        assert!(c.same_partition(&closed));
    }

    #[test]
    fn random_rainbow_closure_passes_axioms() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let n = 6usize;
            // random symmetric-closed pair coloring: color of (u,v) fused
            // with color of (v,u) and the equality flag
            let mut raw = vec![0u32; n * n];
            for u in 0..n {
                for v in 0..n {
                    raw[u * n + v] = rng.gen_range(0..3);
                }
            }
            let mut seed = vec![0u32; n * n];
            let mut dict: BTreeMap<(bool, u32, u32), u32> = BTreeMap::new();
            for u in 0..n {
                for v in 0..n {
                    let key = (u == v, raw[u * n + v], raw[v * n + u]);
                    let next = dict.len() as u32;
                    seed[u * n + v] = *dict.entry(key).or_insert(next);
                }
            }
            let c = coherent_closure(n, 2, &seed, &cfg()).unwrap();
            assert!(c.check_axioms().is_ok());
            assert!(c.check_coherence_exhaustive().is_ok());
        }
    }

    #[test]
    fn skeleton_of_k_is_self() {
        let c = build_configuration(&k3(), 2, &cfg()).unwrap();
        let s = c.skeleton(2);
        assert!(c.same_partition(&s));
        let s1 = c.skeleton(1);
        assert_eq!(s1.relation_count, 1); // single fiber
    }

    #[test]
    fn extension_number_counting_identity() {
        // ext(R_I | R) * |R_I| = |R| on a small configuration
        let s = Structure::simple_graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let c = build_configuration(&s, 3, &cfg()).unwrap();
        let skel = c.skeleton(2);
        for rel in 0..c.relation_count as u32 {
            let rep = c.representative(rel);
            // face on I = {0,1}
            let face2 = skel.table[skel.space().pair(rep[0], rep[1])];
            // count extensions of (rep[0], rep[1]) into rel
            let mut ext = 0u64;
            for y in 0..c.n as u32 {
                if c.table[c.space().index(&[rep[0], rep[1], y])] == rel {
                    ext += 1;
                }
            }
            assert_eq!(
                ext * skel.relation_size(face2) as u64,
                c.relation_size(rel) as u64,
                "counting identity fails for relation {rel}"
            );
        }
    }

    #[test]
    fn thin_fibers() {
        // fiber of size 2: identity + swap is thin
        let s = Structure::colored_graph(2, vec![0, 0], &[(0, 1)], &[]).unwrap();
        let c = build_configuration(&s, 2, &cfg()).unwrap();
        assert!(is_thin_fiber(&c, 0));
        // directed 3-cycle: cyclic relations are permutations
        let t = Structure::new(
            3,
            true,
            vec![0, 0, 0],
            vec![crate::structures::Relation::from_pairs(
                crate::structures::RelName::Edge(0),
                vec![(0, 1), (1, 2), (2, 0)],
            )],
        )
        .unwrap();
        let ct = build_configuration(&t, 2, &cfg()).unwrap();
        assert!(is_thin_fiber(&ct, 0));
        // K4: complete relation has degree 3
        let k4 = Structure::simple_graph(
            4,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        )
        .unwrap();
        let c4 = build_configuration(&k4, 2, &cfg()).unwrap();
        assert!(!is_thin_fiber(&c4, 0));
    }
}
