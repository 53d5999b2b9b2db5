//! Definition-faithful Weisfeiler-Leman oracle.
//!
//! Everything here is computed directly from the textbook definition with no
//! incremental bookkeeping, stride tricks, or hashing: tuples are explicit
//! vectors, descriptors are explicit sorted vectors interned through a
//! `BTreeMap`. It exists so the optimized engine has an independent
//! implementation to be measured against, and is capped to small inputs.

use std::collections::{BTreeMap, BTreeSet};

use super::{StableColoring, WlError};
use crate::structures::{ColorId, Structure, VertexId};

const ORACLE_CAP: u64 = 1_000_000;

fn all_tuples(n: usize, k: usize) -> Vec<Vec<VertexId>> {
    let mut out: Vec<Vec<VertexId>> = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &out {
            for v in 0..n as VertexId {
                let mut t2 = t.clone();
                t2.push(v);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Atomic type of an ordered tuple: equality pattern, vertex colors, and the
/// full relation membership pattern over all index maps.
fn atomic_type(s: &Structure, tuple: &[VertexId]) -> Vec<u64> {
    let k = tuple.len();
    let mut desc: Vec<u64> = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            desc.push((tuple[i] == tuple[j]) as u64);
        }
    }
    for &v in tuple {
        desc.push(s.vertex_color(v) as u64);
    }
    for rel in s.relations() {
        let r = rel.arity;
        let members: BTreeSet<Vec<VertexId>> = rel.tuples().map(|t| t.to_vec()).collect();
        let mut maps: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..r {
            let mut next = Vec::new();
            for m in &maps {
                for i in 0..k {
                    let mut m2 = m.clone();
                    m2.push(i);
                    next.push(m2);
                }
            }
            maps = next;
        }
        for m in maps {
            let probe: Vec<VertexId> = m.iter().map(|&i| tuple[i]).collect();
            desc.push(members.contains(&probe) as u64);
        }
    }
    desc
}

fn intern<K: Ord>(keys: Vec<K>) -> (Vec<ColorId>, usize) {
    let mut dict: BTreeMap<&K, ColorId> = BTreeMap::new();
    for key in &keys {
        dict.entry(key).or_insert(0);
    }
    let mut next = 0;
    for (_, id) in dict.iter_mut() {
        *id = next;
        next += 1;
    }
    let colors = keys.iter().map(|key| dict[key]).collect();
    (colors, next as usize)
}

pub(super) fn stable_coloring(s: &Structure, k: usize) -> Result<StableColoring, WlError> {
    let n = s.vertex_count();
    let size = (n as u64).checked_pow(k as u32).unwrap_or(u64::MAX);
    if size > ORACLE_CAP {
        return Err(WlError::OracleSizeExceeded {
            size,
            cap: ORACLE_CAP,
        });
    }
    if k == 1 {
        return stable_k1(s);
    }

    let tuples = all_tuples(n, k);
    let descs: Vec<Vec<u64>> = tuples.iter().map(|t| atomic_type(s, t)).collect();
    let (mut colors, mut color_count) = intern(descs);
    let mut history = vec![color_count];

    // Index of a tuple in the enumeration order (first entry most
    // significant) so substitution can be done by recomputation.
    let index_of = |t: &[VertexId]| -> usize {
        let mut idx = 0usize;
        for &v in t {
            idx = idx * n + v as usize;
        }
        idx
    };

    let mut rounds = 0usize;
    loop {
        let mut keys: Vec<(ColorId, Vec<Vec<ColorId>>)> = Vec::with_capacity(tuples.len());
        for t in &tuples {
            let mut multiset: Vec<Vec<ColorId>> = Vec::with_capacity(n);
            for y in 0..n as VertexId {
                let mut item = Vec::with_capacity(k);
                for i in 0..k {
                    let mut sub = t.clone();
                    sub[i] = y;
                    item.push(colors[index_of(&sub)]);
                }
                multiset.push(item);
            }
            multiset.sort();
            keys.push((colors[index_of(t)], multiset));
        }
        let (new_colors, new_count) = intern(keys);
        if new_count == color_count {
            break;
        }
        colors = new_colors;
        color_count = new_count;
        rounds += 1;
        history.push(color_count);
    }

    Ok(StableColoring {
        k,
        n,
        tuple_color: colors,
        color_count,
        round_count: rounds,
        history,
    })
}

/// Classic color refinement: refine vertex colors by the multiset of
/// (relation, direction, neighbor color) over all binary relations.
fn stable_k1(s: &Structure) -> Result<StableColoring, WlError> {
    let n = s.vertex_count();
    // Initial colors: declared vertex color plus unary relation memberships.
    let init: Vec<Vec<u64>> = (0..n as VertexId)
        .map(|v| {
            let mut d = vec![s.vertex_color(v) as u64];
            for rel in s.relations().iter().filter(|r| r.arity == 1) {
                d.push(rel.tuples().any(|t| t[0] == v) as u64);
            }
            d
        })
        .collect();
    let (mut colors, mut color_count) = intern(init);
    let mut history = vec![color_count];
    let mut rounds = 0usize;
    loop {
        let mut keys: Vec<(ColorId, Vec<(usize, u8, ColorId)>)> = Vec::with_capacity(n);
        for v in 0..n as VertexId {
            let mut items: Vec<(usize, u8, ColorId)> = Vec::new();
            for (ri, rel) in s.relations().iter().enumerate() {
                if rel.arity != 2 {
                    continue;
                }
                for t in rel.tuples() {
                    if t[0] == v {
                        items.push((ri, 0, colors[t[1] as usize]));
                    }
                    if t[1] == v {
                        items.push((ri, 1, colors[t[0] as usize]));
                    }
                }
            }
            items.sort();
            keys.push((colors[v as usize], items));
        }
        let (new_colors, new_count) = intern(keys);
        if new_count == color_count {
            break;
        }
        colors = new_colors;
        color_count = new_count;
        rounds += 1;
        history.push(color_count);
    }
    Ok(StableColoring {
        k: 1,
        n,
        tuple_color: colors,
        color_count,
        round_count: rounds,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::super::naive_stable_coloring;
    use crate::structures::Structure;

    #[test]
    fn k3_two_classes() {
        let s = Structure::simple_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let col = naive_stable_coloring(&s, 2).unwrap();
        assert_eq!(col.color_count, 2);
    }

    #[test]
    fn oracle_cap() {
        let s = Structure::simple_graph(40, &[(0, 1)]).unwrap();
        assert!(naive_stable_coloring(&s, 4).is_err());
    }

    #[test]
    fn c5_k1_regular() {
        let edges: Vec<(u32, u32)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let s = Structure::simple_graph(5, &edges).unwrap();
        let col = naive_stable_coloring(&s, 1).unwrap();
        assert_eq!(col.color_count, 1);
    }
}
