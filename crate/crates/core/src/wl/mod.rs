//! The Weisfeiler-Leman refinement engines.
//!
//! `stable_coloring` is the production engine; `naive_stable_coloring` is an
//! independent implementation straight from the definition that serves as the
//! test oracle. Both compute, for `k >= 2`, the iterated refinement
//! `chi_{r+1}(x) = (chi_r(x), {{ (chi_r(x[1<-y]), ..., chi_r(x[k<-y])) : y }})`
//! starting from the partition of k-tuples by isomorphism type, and for
//! `k = 1` classic color refinement on vertices.

mod engine;
pub mod naive;

use thiserror::Error;

use crate::structures::{ColorId, Structure, VertexId};
use crate::{EngineConfig, K_MAX};

#[derive(Debug, Error)]
pub enum WlError {
    #[error("k={0} outside supported range 1..={K_MAX}")]
    KOutOfRange(usize),
    #[error("relation arity {arity} exceeds k={k}")]
    ArityExceedsK { arity: usize, k: usize },
    #[error("memory budget exceeded: tuple tables need {required} bytes, cap is {cap}")]
    MemoryBudgetExceeded { required: u64, cap: u64 },
    #[error("oracle size cap exceeded: n^k = {size} > {cap}")]
    OracleSizeExceeded { size: u64, cap: u64 },
    #[error(transparent)]
    Structure(#[from] crate::structures::StructureError),
}

/// Dense mixed-radix tuple indexing over `V^k`: the first tuple entry is the
/// most significant digit, so substitution in position `i` is stride
/// arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct TupleSpace {
    pub n: usize,
    pub k: usize,
    pub size: usize,
    strides: [usize; K_MAX],
}

impl TupleSpace {
    pub fn new(n: usize, k: usize) -> Option<TupleSpace> {
        if k == 0 || k > K_MAX {
            return None;
        }
        let size = n.checked_pow(k as u32)?;
        let mut strides = [0usize; K_MAX];
        let mut s = 1usize;
        for i in (0..k).rev() {
            strides[i] = s;
            s = s.checked_mul(n)?;
        }
        Some(TupleSpace { n, k, size, strides })
    }

    #[inline]
    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    #[inline]
    pub fn index(&self, tuple: &[VertexId]) -> usize {
        debug_assert_eq!(tuple.len(), self.k);
        let mut idx = 0usize;
        for &v in tuple {
            idx = idx * self.n + v as usize;
        }
        idx
    }

    #[inline]
    pub fn decode(&self, mut idx: usize, out: &mut [VertexId]) {
        for i in (0..self.k).rev() {
            out[i] = (idx % self.n) as VertexId;
            idx /= self.n;
        }
    }

    /// Index of the tuple with position `pos` (current digit `old`) replaced
    /// by `new`.
    #[inline]
    pub fn substitute(&self, idx: usize, pos: usize, old: VertexId, new: VertexId) -> usize {
        (idx as isize + (new as isize - old as isize) * self.strides[pos] as isize) as usize
    }

    /// Index of the constant tuple (v, ..., v).
    #[inline]
    pub fn diagonal(&self, v: VertexId) -> usize {
        let mut idx = 0usize;
        for _ in 0..self.k {
            idx = idx * self.n + v as usize;
        }
        idx
    }

    /// Index of (u, v, v, ..., v); requires k >= 2.
    #[inline]
    pub fn pair(&self, u: VertexId, v: VertexId) -> usize {
        let mut idx = u as usize;
        for _ in 1..self.k {
            idx = idx * self.n + v as usize;
        }
        idx
    }
}

/// A (possibly stable) coloring of `V^k` with canonical color ids.
#[derive(Debug, Clone)]
pub struct StableColoring {
    pub k: usize,
    pub n: usize,
    /// Dense table over `V^k`, mixed-radix indexed via [`TupleSpace`].
    pub tuple_color: Vec<ColorId>,
    pub color_count: usize,
    /// Number of productive refinement rounds applied after the initial
    /// coloring.
    pub round_count: usize,
    /// Color counts after the initial coloring and after each productive
    /// round; `history.len() == round_count + 1`.
    pub history: Vec<usize>,
}

impl StableColoring {
    pub fn space(&self) -> TupleSpace {
        TupleSpace::new(self.n, self.k).expect("space parameters were validated on construction")
    }

    pub fn color_of(&self, tuple: &[VertexId]) -> ColorId {
        self.tuple_color[self.space().index(tuple)]
    }

    /// Color of the constant tuple (v,...,v); the WL color of the 1-tuple `v`
    /// under the repeat-last-entry convention.
    pub fn diagonal_color(&self, v: VertexId) -> ColorId {
        self.tuple_color[self.space().diagonal(v)]
    }

    /// Color of (u, v, ..., v): the 2-tuple color under the repeat convention.
    pub fn pair_color(&self, u: VertexId, v: VertexId) -> ColorId {
        assert!(self.k >= 2);
        self.tuple_color[self.space().pair(u, v)]
    }

    /// True when the two colorings induce the same partition of `V^k`
    /// (color ids may differ).
    pub fn same_partition(&self, other: &StableColoring) -> bool {
        if self.n != other.n || self.k != other.k {
            return false;
        }
        if self.color_count != other.color_count {
            return false;
        }
        let mut fwd = vec![u32::MAX; self.color_count];
        let mut bwd = vec![u32::MAX; other.color_count];
        for (&a, &b) in self.tuple_color.iter().zip(other.tuple_color.iter()) {
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

    /// Class sizes indexed by color.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.color_count];
        for &c in &self.tuple_color {
            sizes[c as usize] += 1;
        }
        sizes
    }
}

fn check_params(s: &Structure, k: usize) -> Result<(), WlError> {
    if k == 0 || k > K_MAX {
        return Err(WlError::KOutOfRange(k));
    }
    let max_arity = s.max_arity();
    // k = 1 is classic color refinement and tolerates binary relations.
    let effective = if k == 1 { 2 } else { k };
    if max_arity > effective {
        return Err(WlError::ArityExceedsK { arity: max_arity, k });
    }
    Ok(())
}

/// The partition of `V^k` by isomorphism type of the induced ordered
/// substructure (round 0 of the refinement).
pub fn initial_coloring(s: &Structure, k: usize, cfg: &EngineConfig) -> Result<StableColoring, WlError> {
    check_params(s, k)?;
    engine::initial_only(s, k, cfg)
}

/// The stable coloring: iterated refinement run to its fixed point, with
/// canonical per-round color ids. Deterministic across runs, platforms, and
/// thread counts.
pub fn stable_coloring(s: &Structure, k: usize, cfg: &EngineConfig) -> Result<StableColoring, WlError> {
    check_params(s, k)?;
    engine::stable(s, k, cfg)
}

/// Fixed point of refinement seeded with an arbitrary initial partition of
/// `V^k` (used for coherent closures). `init[i]` is the seed color of tuple
/// `i`; seed ids need not be dense.
pub fn refine_partition(
    n: usize,
    k: usize,
    init: &[ColorId],
    cfg: &EngineConfig,
) -> Result<StableColoring, WlError> {
    engine::refine_seeded(n, k, init, cfg)
}

/// Definition-faithful oracle; see [`naive`].
pub fn naive_stable_coloring(s: &Structure, k: usize) -> Result<StableColoring, WlError> {
    check_params(s, k)?;
    naive::stable_coloring(s, k)
}

/// Resumes refinement after individualizations on a previously stable table;
/// see the engine. Used by the search layer for incremental 2-WL pruning.
pub(crate) fn resume_refinement(
    n: usize,
    k: usize,
    table: Vec<ColorId>,
    color_count: usize,
    changed: Vec<(u32, ColorId)>,
    cfg: &EngineConfig,
) -> Result<StableColoring, WlError> {
    engine::resume(n, k, table, color_count, changed, cfg)
}

/// Outcome of a WL[k]-equivalence test between two structures.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// Colors of the joint refinement whose pure-tuple counts differ,
    /// as (color, count in S, count in T). Empty when equivalent.
    pub differing_colors: Vec<(ColorId, u64, u64)>,
    pub joint_color_count: usize,
}

/// WL[k]-equivalence via joint refinement of the disjoint union: the
/// structures are equivalent iff every stable color has as many k-tuples
/// drawn wholly from S as drawn wholly from T.
pub fn equivalent(
    s: &Structure,
    t: &Structure,
    k: usize,
    cfg: &EngineConfig,
) -> Result<EquivalenceReport, WlError> {
    if s.signature() != t.signature() {
        return Err(WlError::Structure(
            crate::structures::StructureError::SignatureMismatch(format!(
                "{:?} vs {:?}",
                s.signature(),
                t.signature()
            )),
        ));
    }
    if s.vertex_count() != t.vertex_count() {
        return Ok(EquivalenceReport {
            equivalent: false,
            differing_colors: Vec::new(),
            joint_color_count: 0,
        });
    }
    let (union, off) = s.disjoint_union(t)?;
    let col = stable_coloring(&union, k, cfg)?;
    let space = col.space();
    let mut counts = vec![(0u64, 0u64); col.color_count];
    let mut tuple = [0u32; K_MAX];
    for idx in 0..space.size {
        space.decode(idx, &mut tuple[..k]);
        let c = col.tuple_color[idx] as usize;
        if tuple[..k].iter().all(|&v| v < off) {
            counts[c].0 += 1;
        } else if tuple[..k].iter().all(|&v| v >= off) {
            counts[c].1 += 1;
        }
    }
    let differing: Vec<(ColorId, u64, u64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(c, &(a, b))| (c as u32, a, b))
        .collect();
    Ok(EquivalenceReport {
        equivalent: differing.is_empty(),
        differing_colors: differing,
        joint_color_count: col.color_count,
    })
}

/// Whether WL[k] assigns `v` and `w` different stable colors in `s`
/// (the repeat-last-entry convention for 1-tuples). This is the pair-split
/// test: a color class pair {v,w} is split iff this returns true.
pub fn splits_pair(
    s: &Structure,
    v: VertexId,
    w: VertexId,
    k: usize,
    cfg: &EngineConfig,
) -> Result<bool, WlError> {
    let col = stable_coloring(s, k, cfg)?;
    Ok(col.diagonal_color(v) != col.diagonal_color(w))
}

/// Intersection number: how many `y` simultaneously move `x` into color `c_i`
/// when substituted at every position `i`. Well-defined per stable color of
/// `x` (checked in debug builds against a second representative).
pub fn intersection_number(col: &StableColoring, x: &[VertexId], c: &[ColorId]) -> u64 {
    assert_eq!(x.len(), col.k);
    assert_eq!(c.len(), col.k);
    let space = col.space();
    let idx = space.index(x);
    let count = count_intersection(col, &space, idx, x, c);
    #[cfg(debug_assertions)]
    {
        // Spot-check well-definedness: the first other tuple of equal color
        // must yield the same count.
        let color = col.tuple_color[idx];
        let mut other = [0u32; K_MAX];
        for j in 0..space.size.min(4096) {
            if j != idx && col.tuple_color[j] == color {
                space.decode(j, &mut other[..col.k]);
                let alt = count_intersection(col, &space, j, &other[..col.k], c);
                debug_assert_eq!(alt, count, "intersection number not invariant on class");
                break;
            }
        }
    }
    count
}

fn count_intersection(
    col: &StableColoring,
    space: &TupleSpace,
    idx: usize,
    x: &[VertexId],
    c: &[ColorId],
) -> u64 {
    let mut count = 0u64;
    for y in 0..space.n as u32 {
        let mut ok = true;
        for i in 0..col.k {
            let j = space.substitute(idx, i, x[i], y);
            if col.tuple_color[j] != c[i] {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Structure;

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    fn cycle(n: usize) -> Structure {
        let edges: Vec<(u32, u32)> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
        Structure::simple_graph(n, &edges).unwrap()
    }

    #[test]
    fn k3_two_pair_classes() {
        let s = Structure::simple_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let col = stable_coloring(&s, 2, &cfg()).unwrap();
        // Complete monochromatic graph: diagonal pairs and edge pairs.
        assert_eq!(col.color_count, 2);
        let init = initial_coloring(&s, 2, &cfg()).unwrap();
        assert_eq!(init.color_count, 2);
        assert_eq!(col.round_count, 0);
    }

    #[test]
    fn path3_pairs_by_hand() {
        // Path 0-1-2: hand enumeration of all 9 ordered pairs.
        // Round 0 knows only isomorphism types: diagonal, edge, non-edge.
        let s = Structure::simple_graph(3, &[(0, 1), (1, 2)]).unwrap();
        let init = initial_coloring(&s, 2, &cfg()).unwrap();
        assert_eq!(init.color_count, 3);
        let ci = |u: u32, v: u32| init.color_of(&[u, v]);
        assert_eq!(ci(0, 0), ci(1, 1));
        assert_eq!(ci(0, 1), ci(1, 0));
        assert_ne!(ci(0, 2), ci(0, 1));
        // The fixed point separates diagonals by vertex role and the ordered
        // edge pairs (end,mid) from (mid,end):
        // {00,22}, {11}, {01,21}, {10,12}, {02,20}.
        let col = stable_coloring(&s, 2, &cfg()).unwrap();
        assert_eq!(col.color_count, 5);
        let c = |u: u32, v: u32| col.color_of(&[u, v]);
        assert_eq!(c(0, 0), c(2, 2));
        assert_ne!(c(0, 0), c(1, 1));
        assert_eq!(c(0, 1), c(2, 1));
        assert_eq!(c(1, 0), c(1, 2));
        assert_ne!(c(0, 1), c(1, 0));
    }

    #[test]
    fn arity_exceeds_k() {
        let s = Structure::parse("p struct 3 directed\nr mult 3 0 1 2\n").unwrap();
        assert!(matches!(
            stable_coloring(&s, 2, &cfg()),
            Err(WlError::ArityExceedsK { .. })
        ));
        assert!(stable_coloring(&s, 3, &cfg()).is_ok());
    }

    #[test]
    fn c6_k1_monochromatic() {
        let col = stable_coloring(&cycle(6), 1, &cfg()).unwrap();
        assert_eq!(col.color_count, 1);
    }

    #[test]
    fn c6_vs_two_triangles() {
        let c6 = cycle(6);
        let (t, _) = cycle(3).disjoint_union(&cycle(3)).unwrap();
        // 2-regular on both sides: color refinement cannot tell them apart.
        assert!(equivalent(&c6, &t, 1, &cfg()).unwrap().equivalent);
        // 2-WL separates them.
        assert!(!equivalent(&c6, &t, 2, &cfg()).unwrap().equivalent);
    }

    #[test]
    fn equivalent_same_object() {
        let s = cycle(5);
        assert!(equivalent(&s, &s.clone(), 2, &cfg()).unwrap().equivalent);
    }

    #[test]
    fn size_mismatch_not_equivalent() {
        let r = equivalent(&cycle(5), &cycle(6), 2, &cfg()).unwrap();
        assert!(!r.equivalent);
    }

    #[test]
    fn intersection_numbers_k3_edge_pair() {
        // K3, k=2, x an edge pair: brute-force counts over the 3 vertices.
        let s = Structure::simple_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let col = stable_coloring(&s, 2, &cfg()).unwrap();
        let diag = col.color_of(&[0, 0]);
        let edge = col.color_of(&[0, 1]);
        // Substituting y into (0,1): position 0 gives (y,1), position 1 gives
        // (0,y). y=0 -> (edge, diag); y=1 -> (diag, edge); y=2 -> (edge, edge).
        assert_eq!(intersection_number(&col, &[0, 1], &[edge, diag]), 1);
        assert_eq!(intersection_number(&col, &[0, 1], &[diag, edge]), 1);
        assert_eq!(intersection_number(&col, &[0, 1], &[edge, edge]), 1);
        let mut total = 0;
        for c1 in [diag, edge] {
            for c2 in [diag, edge] {
                total += intersection_number(&col, &[0, 1], &[c1, c2]);
            }
        }
        assert_eq!(total, 3); // each y lands in exactly one color pair
        // witness y = x_1: substitution at position 1 yields the diagonal
        assert!(intersection_number(&col, &[0, 1], &[edge, diag]) >= 1);
    }

    #[test]
    fn engine_matches_naive_oracle_random() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for trial in 0..80u32 {
            let n = 4 + (trial as usize % 5);
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.gen_bool(0.4) {
                        edges.push((u, v));
                    }
                }
            }
            let colors: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let s = Structure::colored_graph(n, colors, &edges, &[]).unwrap();
            for k in [1usize, 2, 3] {
                let fast = stable_coloring(&s, k, &cfg()).unwrap();
                let slow = naive_stable_coloring(&s, k).unwrap();
                assert!(
                    fast.same_partition(&slow),
                    "partition mismatch at n={n} k={k} trial={trial}"
                );
                assert_eq!(fast.round_count, slow.round_count);
                assert_eq!(fast.history.len(), slow.history.len());
            }
        }
    }

    #[test]
    fn delta_and_full_paths_agree() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for trial in 0..40u32 {
            let n = 6 + (trial as usize % 6);
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.gen_bool(0.3) {
                        edges.push((u, v));
                    }
                }
            }
            let colors: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
            let s = Structure::colored_graph(n, colors, &edges, &[]).unwrap();
            for k in [2usize, 3] {
                engine::FORCE_PATH.with(|f| f.set(1));
                let full = stable_coloring(&s, k, &cfg()).unwrap();
                engine::FORCE_PATH.with(|f| f.set(2));
                let delta = stable_coloring(&s, k, &cfg()).unwrap();
                engine::FORCE_PATH.with(|f| f.set(0));
                // identical ids, not just identical partitions
                assert_eq!(full.tuple_color, delta.tuple_color, "n={n} k={k}");
                assert_eq!(full.round_count, delta.round_count);
            }
        }
    }

    #[test]
    fn permutation_equivariance() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = 7usize;
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if rng.gen_bool(0.35) {
                        edges.push((u, v));
                    }
                }
            }
            let s = Structure::simple_graph(n, &edges).unwrap();
            let mut img: Vec<u32> = (0..n as u32).collect();
            img.shuffle(&mut rng);
            let t = s.relabel(&img);
            let cs = stable_coloring(&s, 2, &cfg()).unwrap();
            let ct = stable_coloring(&t, 2, &cfg()).unwrap();
            // colors correspond under the permutation, as partitions
            for u in 0..n as u32 {
                for v in 0..n as u32 {
                    for x in 0..n as u32 {
                        for y in 0..n as u32 {
                            let same_s = cs.color_of(&[u, v]) == cs.color_of(&[x, y]);
                            let same_t = ct.color_of(&[img[u as usize], img[v as usize]])
                                == ct.color_of(&[img[x as usize], img[y as usize]]);
                            assert_eq!(same_s, same_t);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coloring_respects_cycle_automorphism() {
        let s = cycle(6);
        let col = stable_coloring(&s, 2, &cfg()).unwrap();
        // rotation is an automorphism: colors must be invariant
        for u in 0..6u32 {
            for v in 0..6u32 {
                let ru = (u + 1) % 6;
                let rv = (v + 1) % 6;
                assert_eq!(col.color_of(&[u, v]), col.color_of(&[ru, rv]));
            }
        }
    }
}
