//! Individualization-refinement search for color-, relation-, and
//! edge-color-preserving isomorphisms and automorphism generators.
//!
//! The refiner is classic color refinement over tagged adjacency (one tag per
//! relation and direction); candidates surface only at discrete partitions
//! and are verified against the adjacency before being accepted, so answers
//! are sound even when refinement is weak. Completeness comes from exhausting
//! the pruned branch set.

use super::perm::{orbit_of, GeneratorSet, Permutation};

#[derive(Debug, thiserror::Error)]
#[error("search budget exceeded after {nodes} nodes")]
pub struct BudgetExceeded {
    pub nodes: u64,
}

pub(crate) struct IrGraph {
    pub n: usize,
    /// Immutable seed colors (already fused with any escalation coloring).
    pub base_colors: Vec<u32>,
    /// Per (relation, direction): sorted adjacency lists.
    rels: Vec<RelAdj>,
}

struct RelAdj {
    out: Vec<Vec<u32>>,
    inn: Vec<Vec<u32>>,
}

impl IrGraph {
    /// `binary_rels[r]` are the (u, v) pairs of relation r; relation indices
    /// must align between graphs that are compared.
    pub fn new(n: usize, base_colors: Vec<u32>, binary_rels: &[Vec<(u32, u32)>]) -> IrGraph {
        let rels = binary_rels
            .iter()
            .map(|pairs| {
                let mut out = vec![Vec::new(); n];
                let mut inn = vec![Vec::new(); n];
                for &(u, v) in pairs {
                    out[u as usize].push(v);
                    inn[v as usize].push(u);
                }
                for l in out.iter_mut().chain(inn.iter_mut()) {
                    l.sort_unstable();
                }
                RelAdj { out, inn }
            })
            .collect();
        IrGraph {
            n,
            base_colors,
            rels,
        }
    }

    fn verify(&self, map: &[u32]) -> bool {
        for v in 0..self.n {
            if self.base_colors[map[v] as usize] != self.base_colors[v] {
                return false;
            }
        }
        for rel in &self.rels {
            for u in 0..self.n {
                let mu = map[u] as usize;
                if rel.out[u].len() != rel.out[mu].len() {
                    return false;
                }
                for &v in &rel.out[u] {
                    if rel.out[mu].binary_search(&map[v as usize]).is_err() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Cross-graph verification (relation indices aligned).
    fn verify_into(&self, other: &IrGraph, map: &[u32]) -> bool {
        if self.n != other.n || self.rels.len() != other.rels.len() {
            return false;
        }
        for v in 0..self.n {
            if other.base_colors[map[v] as usize] != self.base_colors[v] {
                return false;
            }
        }
        for (ra, rb) in self.rels.iter().zip(other.rels.iter()) {
            for u in 0..self.n {
                let mu = map[u] as usize;
                if ra.out[u].len() != rb.out[mu].len() || ra.inn[u].len() != rb.inn[mu].len() {
                    return false;
                }
                for &v in &ra.out[u] {
                    if rb.out[mu].binary_search(&map[v as usize]).is_err() {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Joint color refinement state over two graphs (which may be the same
/// object). Colors live in one shared id space so classes are comparable.
struct Joint<'a> {
    g1: &'a IrGraph,
    g2: &'a IrGraph,
}

impl<'a> Joint<'a> {
    fn signature(&self, g: &IrGraph, v: usize, colors: &[u32], items: &mut Vec<u64>) {
        items.clear();
        for (ri, rel) in g.rels.iter().enumerate() {
            let tag_out = (2 * ri as u64) << 32;
            let tag_in = (2 * ri as u64 + 1) << 32;
            for &u in &rel.out[v] {
                items.push(tag_out | colors[u as usize] as u64);
            }
            for &u in &rel.inn[v] {
                items.push(tag_in | colors[u as usize] as u64);
            }
        }
        items.sort_unstable();
    }

    /// Refine both colorings to the joint stable point. Returns false as soon
    /// as some color class is unbalanced between the two sides.
    fn refine(&self, c1: &mut [u32], c2: &mut [u32], color_count: &mut usize) -> bool {
        let n1 = self.g1.n;
        let n2 = self.g2.n;
        let total = n1 + n2;
        let mut arena: Vec<u64> = Vec::new();
        let mut spans: Vec<(u32, u32, u32)> = Vec::with_capacity(total); // (old, start, len)
        let mut items: Vec<u64> = Vec::new();
        loop {
            arena.clear();
            spans.clear();
            for v in 0..n1 {
                self.signature(self.g1, v, c1, &mut items);
                spans.push((c1[v], arena.len() as u32, items.len() as u32));
                arena.extend_from_slice(&items);
            }
            for v in 0..n2 {
                self.signature(self.g2, v, c2, &mut items);
                spans.push((c2[v], arena.len() as u32, items.len() as u32));
                arena.extend_from_slice(&items);
            }
            let key = |i: u32| {
                let (old, start, len) = spans[i as usize];
                (old, &arena[start as usize..(start + len) as usize])
            };
            let mut order: Vec<u32> = (0..total as u32).collect();
            order.sort_unstable_by(|&a, &b| key(a).cmp(&key(b)).then(a.cmp(&b)));
            let mut next = 0u32;
            let mut new_colors = vec![0u32; total];
            for i in 0..total {
                if i > 0 && key(order[i]) != key(order[i - 1]) {
                    next += 1;
                }
                new_colors[order[i] as usize] = next;
            }
            let new_count = (next + 1) as usize;
            let stable = new_count == *color_count;
            for v in 0..n1 {
                c1[v] = new_colors[v];
            }
            for v in 0..n2 {
                c2[v] = new_colors[n1 + v];
            }
            *color_count = new_count;
            // balance check
            let mut bal = vec![0i64; new_count];
            for v in 0..n1 {
                bal[c1[v] as usize] += 1;
            }
            for v in 0..n2 {
                bal[c2[v] as usize] -= 1;
            }
            if bal.iter().any(|&b| b != 0) {
                return false;
            }
            if stable {
                return true;
            }
        }
    }
}

pub(crate) struct Searcher<'a> {
    joint: Joint<'a>,
    budget: u64,
    pub nodes: u64,
}

impl<'a> Searcher<'a> {
    pub fn new(g1: &'a IrGraph, g2: &'a IrGraph, budget: u64) -> Self {
        Searcher {
            joint: Joint { g1, g2 },
            budget,
            nodes: 0,
        }
    }

    /// Complete search for a color-preserving isomorphism g1 -> g2 extending
    /// the seed colorings. Returns a verified vertex map or None.
    pub fn isomorphism(
        &mut self,
        c1: Vec<u32>,
        c2: Vec<u32>,
        color_count: usize,
    ) -> Result<Option<Vec<u32>>, BudgetExceeded> {
        if self.joint.g1.n != self.joint.g2.n {
            return Ok(None);
        }
        self.recurse(c1, c2, color_count)
    }

    fn recurse(
        &mut self,
        mut c1: Vec<u32>,
        mut c2: Vec<u32>,
        mut color_count: usize,
    ) -> Result<Option<Vec<u32>>, BudgetExceeded> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(BudgetExceeded { nodes: self.nodes });
        }
        if !self.joint.refine(&mut c1, &mut c2, &mut color_count) {
            return Ok(None);
        }
        let n = self.joint.g1.n;
        if color_count == n {
            // discrete: unique partner per color
            let mut slot = vec![u32::MAX; color_count];
            for v in 0..n {
                slot[c2[v] as usize] = v as u32;
            }
            let map: Vec<u32> = (0..n).map(|v| slot[c1[v] as usize]).collect();
            if self.joint.g1.verify_into(self.joint.g2, &map) {
                return Ok(Some(map));
            }
            return Ok(None);
        }
        // target cell: smallest non-singleton class, then smallest color id
        let mut counts = vec![0u32; color_count];
        for v in 0..n {
            counts[c1[v] as usize] += 1;
        }
        let target = (0..color_count)
            .filter(|&c| counts[c] >= 2)
            .min_by_key(|&c| (counts[c], c))
            .expect("non-discrete balanced coloring has a class of size >= 2");
        let a = (0..n).find(|&v| c1[v] as usize == target).unwrap() as u32;
        let fresh = color_count as u32;
        for b in 0..n as u32 {
            if c2[b as usize] as usize != target {
                continue;
            }
            let mut d1 = c1.clone();
            let mut d2 = c2.clone();
            d1[a as usize] = fresh;
            d2[b as usize] = fresh;
            if let Some(map) = self.recurse(d1, d2, color_count + 1)? {
                return Ok(Some(map));
            }
        }
        Ok(None)
    }
}

pub(crate) fn joint_refine(
    g1: &IrGraph,
    g2: &IrGraph,
    c1: &mut [u32],
    c2: &mut [u32],
    count: &mut usize,
) -> bool {
    Joint { g1, g2 }.refine(c1, c2, count)
}

/// Isomorphism search over a shared 2-WL pair table of the disjoint union:
/// per node, the individualized pair is recolored on the diagonal and the
/// table is resumed incrementally, so splits cascade with full 2-WL strength.
/// This is the escalation path for graphs where plain color refinement
/// stalls (CFI-like cores).
pub(crate) struct PairSearcher<'a> {
    ga: &'a IrGraph,
    gb: &'a IrGraph,
    /// vertices per side; the union table indexes side B at n + v
    n: usize,
    cfg: &'a crate::EngineConfig,
    budget: u64,
    pub nodes: u64,
}

impl<'a> PairSearcher<'a> {
    pub fn new(
        ga: &'a IrGraph,
        gb: &'a IrGraph,
        cfg: &'a crate::EngineConfig,
        budget: u64,
    ) -> Self {
        assert_eq!(ga.n, gb.n);
        PairSearcher {
            ga,
            gb,
            n: ga.n,
            cfg,
            budget,
            nodes: 0,
        }
    }

    pub fn search(
        &mut self,
        table: Vec<u32>,
        count: usize,
    ) -> Result<Option<Vec<u32>>, BudgetExceeded> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(BudgetExceeded { nodes: self.nodes });
        }
        let n = self.n;
        let total = 2 * n;
        // per-color balance of side-internal pairs: isomorphic unions have
        // equally many A-A and B-B pairs of every color
        let mut balance = vec![0i64; count];
        for u in 0..n {
            for v in 0..n {
                balance[table[u * total + v] as usize] += 1;
                balance[(table[(n + u) * total + (n + v)]) as usize] -= 1;
            }
        }
        if balance.iter().any(|&b| b != 0) {
            return Ok(None);
        }
        // diagonal (vertex) classes
        let diag = |v: usize| table[v * total + v];
        let mut a_count = vec![0u32; count];
        let mut b_count = vec![0u32; count];
        for v in 0..n {
            a_count[diag(v) as usize] += 1;
            b_count[diag(n + v) as usize] += 1;
        }
        if (0..count).any(|c| a_count[c] != b_count[c]) {
            return Ok(None);
        }
        if (0..n).all(|v| a_count[diag(v) as usize] == 1) {
            // discrete: unique partner per diagonal color
            let mut slot = vec![u32::MAX; count];
            for v in 0..n {
                slot[diag(n + v) as usize] = v as u32;
            }
            let map: Vec<u32> = (0..n).map(|v| slot[diag(v) as usize]).collect();
            if map.iter().any(|&x| x == u32::MAX) {
                return Ok(None);
            }
            if self.ga.verify_into(self.gb, &map) {
                return Ok(Some(map));
            }
            return Ok(None);
        }
        let target = (0..count)
            .filter(|&c| a_count[c] >= 2)
            .min_by_key(|&c| (a_count[c], c))
            .expect("non-discrete balanced coloring has a class of size >= 2");
        let a = (0..n).find(|&v| diag(v) as usize == target).unwrap();
        let fresh = count as u32;
        for b in 0..n {
            if diag(n + b) as usize != target {
                continue;
            }
            let mut t2 = table.clone();
            let old = t2[a * total + a];
            t2[a * total + a] = fresh;
            t2[(n + b) * total + (n + b)] = fresh;
            let changed = vec![
                ((a * total + a) as u32, old),
                (((n + b) * total + (n + b)) as u32, old),
            ];
            let col = crate::wl::resume_refinement(total, 2, t2, count + 1, changed, self.cfg)
                .expect("pair table refinement cannot exceed the memory cap here");
            if let Some(map) = self.search(col.tuple_color, col.color_count)? {
                return Ok(Some(map));
            }
        }
        Ok(None)
    }
}

/// Stabilizer-chain style automorphism generator search: walk down a base of
/// individualized points; at each level, for every unexplored candidate in
/// the target cell, run a complete search for an automorphism fixing the
/// prefix and mapping the cell representative onto the candidate.
pub(crate) fn automorphism_generators_ir(
    g: &IrGraph,
    budget: u64,
) -> Result<GeneratorSet, BudgetExceeded> {
    let n = g.n;
    let mut gens = GeneratorSet::new(n);
    let mut colors = g.base_colors.clone();
    let mut color_count = 0usize;
    let joint = Joint { g1: g, g2: g };
    {
        let mut c2 = colors.clone();
        assert!(joint.refine(&mut colors, &mut c2, &mut color_count));
    }
    let mut prefix: Vec<u32> = Vec::new();
    let mut nodes_used = 0u64;
    loop {
        let mut counts = vec![0u32; color_count];
        for v in 0..n {
            counts[colors[v] as usize] += 1;
        }
        let Some(target) = (0..color_count)
            .filter(|&c| counts[c] >= 2)
            .min_by_key(|&c| (counts[c], c))
        else {
            break;
        };
        let cell: Vec<u32> = (0..n as u32)
            .filter(|&v| colors[v as usize] as usize == target)
            .collect();
        let a = cell[0];
        for &b in &cell[1..] {
            // prune: b already reachable from a by known automorphisms that
            // fix the prefix pointwise
            let fixing: Vec<&Permutation> = gens
                .generators()
                .iter()
                .filter(|p| prefix.iter().all(|&q| p.apply(q) == q))
                .collect();
            let orbit = orbit_of(a, fixing.iter().copied(), n);
            if orbit.binary_search(&b).is_ok() {
                continue;
            }
            let mut c1 = colors.clone();
            let mut c2 = colors.clone();
            let fresh = color_count as u32;
            c1[a as usize] = fresh;
            c2[b as usize] = fresh;
            let mut searcher = Searcher::new(g, g, budget.saturating_sub(nodes_used));
            let found = searcher.isomorphism(c1, c2, color_count + 1);
            nodes_used += searcher.nodes;
            match found {
                Ok(Some(map)) => {
                    debug_assert!(g.verify(&map));
                    let p = Permutation::from_images(map).expect("verified map is a bijection");
                    gens.push(p);
                }
                Ok(None) => {}
                Err(_) => return Err(BudgetExceeded { nodes: nodes_used }),
            }
        }
        // individualize a onto itself and descend
        prefix.push(a);
        colors[a as usize] = color_count as u32;
        color_count += 1;
        let mut c2 = colors.clone();
        assert!(joint.refine(&mut colors, &mut c2, &mut color_count));
    }
    Ok(gens)
}
