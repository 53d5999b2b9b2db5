//! Optimized refinement engine.
//!
//! Rounds are definition-faithful: round r+1 partitions each round-r class by
//! the sorted multiset of substitution color tuples, and new ids are assigned
//! per round by (parent color, descriptor) rank, so ids match the naive
//! engine's exactly. Two execution paths produce identical results:
//!
//! - full: recompute the descriptor of every member of every dirty class
//!   (a class is dirty when some member shares a substitution line with a
//!   tuple that changed class last round);
//! - delta: broadcast the changed tuples' old/new colors along their lines
//!   and regroup affected tuples by the signed difference of their
//!   descriptors, which coincides with regrouping by the full descriptor
//!   because members of one class had equal descriptors last round.
//!
//! There is no lossy hashing anywhere: grouping compares explicit sorted
//! descriptors (a content hash is used only to pre-sort oversized classes,
//! and every candidate group is then confirmed by exact comparison).

use rayon::prelude::*;

use super::{StableColoring, TupleSpace, WlError};
use crate::structures::{ColorId, Structure, VertexId};
use crate::EngineConfig;

const ARENA_CAP_ITEMS: usize = 96_000_000;
const DELTA_RECORD_CAP: usize = 40_000_000;

/// Test-only override of the per-round path choice (0 auto, 1 full, 2 delta).
#[cfg(test)]
thread_local! {
    pub(super) static FORCE_PATH: std::cell::Cell<u8> = const { std::cell::Cell::new(0) };
}

fn forced_path() -> u8 {
    #[cfg(test)]
    {
        return FORCE_PATH.with(|f| f.get());
    }
    #[allow(unreachable_code)]
    0
}

// ---------------------------------------------------------------------------
// atomic (round-0) descriptors
// ---------------------------------------------------------------------------

struct AtomicBuilder<'a> {
    s: &'a Structure,
    space: TupleSpace,
    k: usize,
    /// Per relation: lexicographically enumerated index maps [k]^r and the
    /// sorted packed member tuples for binary-search membership tests.
    rels: Vec<(Vec<Vec<u8>>, Vec<u128>)>,
    words: usize,
    color_words: usize,
}

impl<'a> AtomicBuilder<'a> {
    fn new(s: &'a Structure, space: TupleSpace) -> Self {
        let k = space.k;
        let n = space.n as u128;
        let mut rels = Vec::new();
        let mut flag_bits = k * (k - 1) / 2;
        for rel in s.relations() {
            let r = rel.arity;
            let mut maps: Vec<Vec<u8>> = vec![vec![]];
            for _ in 0..r {
                let mut next = Vec::new();
                for m in &maps {
                    for i in 0..k as u8 {
                        let mut m2 = m.clone();
                        m2.push(i);
                        next.push(m2);
                    }
                }
                maps = next;
            }
            let mut packed: Vec<u128> = rel
                .tuples()
                .map(|t| t.iter().fold(0u128, |acc, &v| acc * n + v as u128))
                .collect();
            packed.sort_unstable();
            flag_bits += maps.len();
            rels.push((maps, packed));
        }
        let color_words = k.div_ceil(4);
        let words = flag_bits.div_ceil(128) + color_words;
        AtomicBuilder {
            s,
            space,
            k,
            rels,
            words,
            color_words,
        }
    }

    fn build(&self, idx: u32, out: &mut [u128]) {
        let k = self.k;
        let n = self.space.n as u128;
        let mut tuple = [0 as VertexId; crate::K_MAX];
        self.space.decode(idx as usize, &mut tuple[..k]);
        out.fill(0);
        // colors first (fixed offset), flags after
        for i in 0..k {
            out[i / 4] |= (self.s.vertex_color(tuple[i]) as u128) << (32 * (i % 4));
        }
        let mut bit = 0usize;
        let base = self.color_words;
        let mut push = |out: &mut [u128], b: bool| {
            if b {
                out[base + bit / 128] |= 1u128 << (bit % 128);
            }
            bit += 1;
        };
        for i in 0..k {
            for j in i + 1..k {
                push(out, tuple[i] == tuple[j]);
            }
        }
        for (maps, packed) in &self.rels {
            for m in maps {
                let key = m.iter().fold(0u128, |acc, &i| acc * n + tuple[i as usize] as u128);
                push(out, packed.binary_search(&key).is_ok());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// multiset (round >= 1) descriptors
// ---------------------------------------------------------------------------

struct RoundBuilder<'a> {
    space: TupleSpace,
    colors: &'a [ColorId],
    /// k = 2 only: per source row, the targets ordered by substitution color
    /// (so descriptors stream out sorted by first component and only the
    /// short equal-color runs need sorting).
    row_order: Option<&'a [u32]>,
}

impl<'a> RoundBuilder<'a> {
    /// Sorted multiset of substitution color tuples, one u128 per y with the
    /// first position in the most significant bits (matches the oracle's
    /// lexicographic item order).
    fn build(&self, idx: u32, out: &mut [u128]) {
        let k = self.space.k;
        let n = self.space.n;
        if k == 2 {
            if let Some(order) = self.row_order {
                return self.build_k2(idx, order, out);
            }
        }
        let mut tuple = [0 as VertexId; crate::K_MAX];
        self.space.decode(idx as usize, &mut tuple[..k]);
        let mut bases = [0isize; crate::K_MAX];
        for i in 0..k {
            bases[i] = idx as isize - tuple[i] as isize * self.space.stride(i) as isize;
        }
        for y in 0..n {
            let mut item = 0u128;
            for i in 0..k {
                let j = (bases[i] + y as isize * self.space.stride(i) as isize) as usize;
                item = (item << 32) | self.colors[j] as u128;
            }
            out[y] = item;
        }
        out.sort_unstable();
    }

    /// k = 2 descriptor: the item for slot y is (c(y,v), c(u,y)) packed
    /// high-to-low, so enumerating y by ascending c(y,v) (the precomputed
    /// per-column order) streams items sorted up to short runs of equal
    /// first component.
    fn build_k2(&self, idx: u32, order: &[u32], out: &mut [u128]) {
        let n = self.space.n;
        let u = idx as usize / n;
        let v = idx as usize % n;
        let col_v = &order[v * n..(v + 1) * n];
        let mut w = 0usize;
        while w < n {
            let y0 = col_v[w] as usize;
            let a0 = self.colors[y0 * n + v];
            let run_start = w;
            while w < n && self.colors[col_v[w] as usize * n + v] == a0 {
                let y = col_v[w] as usize;
                out[w] = ((a0 as u128) << 32) | self.colors[u * n + y] as u128;
                w += 1;
            }
            let run = &mut out[run_start..w];
            if run.len() > 1 {
                if run.len() <= 32 {
                    // short runs: insertion sort
                    for i in 1..run.len() {
                        let mut j = i;
                        while j > 0 && run[j - 1] > run[j] {
                            run.swap(j - 1, j);
                            j -= 1;
                        }
                    }
                } else {
                    run.sort_unstable();
                }
            }
        }
    }

    fn current_item(&self, idx: u32, y: VertexId) -> u128 {
        let k = self.space.k;
        let mut tuple = [0 as VertexId; crate::K_MAX];
        self.space.decode(idx as usize, &mut tuple[..k]);
        let mut item = 0u128;
        for i in 0..k {
            let j = self.space.substitute(idx as usize, i, tuple[i], y);
            item = (item << 32) | self.colors[j] as u128;
        }
        item
    }
}

// ---------------------------------------------------------------------------
// exact grouping of one class
// ---------------------------------------------------------------------------

fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn hash_desc(desc: &[u128]) -> u128 {
    let mut h1 = 0x9e3779b97f4a7c15u64;
    let mut h2 = 0xc2b2ae3d27d4eb4fu64;
    for &w in desc {
        h1 = mix64(h1 ^ (w as u64));
        h2 = mix64(h2 ^ ((w >> 64) as u64)).rotate_left(17) ^ h1;
    }
    ((h1 as u128) << 64) | h2 as u128
}

/// Splits `members` into groups of equal descriptor, groups ordered by
/// ascending descriptor (lexicographic), members within a group ascending.
/// `build(idx, out)` writes the descriptor of a member into `out`
/// (`desc_len` words). Exact: equalities are always confirmed by comparison.
fn group_members(
    members: &[u32],
    desc_len: usize,
    build: &(dyn Fn(u32, &mut [u128]) + Sync),
) -> Vec<Vec<u32>> {
    if members.len() == 1 {
        return vec![members.to_vec()];
    }
    if members.len().saturating_mul(desc_len) <= ARENA_CAP_ITEMS {
        // Arena path: materialize all descriptors, sort members by them.
        let mut arena: Vec<u128> = vec![0; members.len() * desc_len];
        arena
            .par_chunks_mut(desc_len)
            .zip(members.par_iter())
            .for_each(|(slot, &m)| build(m, slot));
        let mut order: Vec<u32> = (0..members.len() as u32).collect();
        let slice = |r: u32| &arena[r as usize * desc_len..(r as usize + 1) * desc_len];
        if members.len() > 2048 {
            order.par_sort_unstable_by(|&a, &b| {
                slice(a).cmp(slice(b)).then(members[a as usize].cmp(&members[b as usize]))
            });
        } else {
            order.sort_unstable_by(|&a, &b| {
                slice(a).cmp(slice(b)).then(members[a as usize].cmp(&members[b as usize]))
            });
        }
        let mut groups: Vec<Vec<u32>> = Vec::new();
        let mut start = 0usize;
        for i in 1..=order.len() {
            if i == order.len() || slice(order[i]) != slice(order[start]) {
                groups.push(order[start..i].iter().map(|&r| members[r as usize]).collect());
                start = i;
            }
        }
        groups
    } else {
        // Oversized class: pre-sort by content hash, then confirm and order
        // every group by explicit descriptor comparison.
        let hashes: Vec<u128> = members
            .par_iter()
            .map(|&m| {
                let mut buf = vec![0u128; desc_len];
                build(m, &mut buf);
                hash_desc(&buf)
            })
            .collect();
        let mut order: Vec<u32> = (0..members.len() as u32).collect();
        order.par_sort_unstable_by(|&a, &b| {
            hashes[a as usize]
                .cmp(&hashes[b as usize])
                .then(members[a as usize].cmp(&members[b as usize]))
        });
        let mut groups: Vec<(Vec<u128>, Vec<u32>)> = Vec::new();
        let mut buf = vec![0u128; desc_len];
        let mut start = 0usize;
        for i in 1..=order.len() {
            if i == order.len() || hashes[order[i] as usize] != hashes[order[start] as usize] {
                // one hash run; confirm exact equality inside
                let mut subs: Vec<(Vec<u128>, Vec<u32>)> = Vec::new();
                for &r in &order[start..i] {
                    let m = members[r as usize];
                    build(m, &mut buf);
                    match subs.iter_mut().find(|(d, _)| d == &buf) {
                        Some((_, v)) => v.push(m),
                        None => subs.push((buf.clone(), vec![m])),
                    }
                }
                groups.append(&mut subs);
                start = i;
            }
        }
        groups.sort_by(|a, b| a.0.cmp(&b.0));
        groups.into_iter().map(|(_, v)| v).collect()
    }
}

// ---------------------------------------------------------------------------
// the round loop
// ---------------------------------------------------------------------------

struct Refiner {
    space: TupleSpace,
    colors: Vec<ColorId>,
    color_count: usize,
    /// Non-representative members of classes split last round, with the id
    /// their class would have kept (the largest child's id).
    changed: Vec<(u32, ColorId)>,
    history: Vec<usize>,
    rounds: usize,
}

/// Per-parent outcome of a round: children in canonical (descriptor) order.
/// `Explicit` lists every member; `Rest` stands for the parent's remaining
/// members (delta path: the untouched ones).
enum Child {
    Explicit(Vec<u32>),
    Rest,
}

impl Refiner {
    fn new(space: TupleSpace, init: Vec<ColorId>, color_count: usize) -> Self {
        Refiner {
            space,
            colors: init,
            color_count,
            changed: Vec::new(),
            history: vec![color_count],
            rounds: 0,
        }
    }

    fn buckets(&self) -> (Vec<u32>, Vec<u32>) {
        let size = self.space.size;
        let mut counts = vec![0u32; self.color_count + 1];
        for &c in &self.colors {
            counts[c as usize + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut members = vec![0u32; size];
        for idx in 0..size as u32 {
            let c = self.colors[idx as usize] as usize;
            members[cursor[c] as usize] = idx;
            cursor[c] += 1;
        }
        (offsets, members)
    }

    /// One refinement round; returns false at the fixed point.
    fn round(&mut self, first: bool) -> bool {
        let (offsets, members) = self.buckets();
        let n = self.space.n;
        let k = self.space.k;

        // Where can descriptors have changed since last round?
        let splits: Vec<(u32, Vec<Child>)> = if first {
            self.full_round(&offsets, &members, None)
        } else {
            let line_size = self.space.size / n.max(1);
            let mut dirty_lines = vec![vec![false; line_size]; k];
            for &(z, _) in &self.changed {
                for i in 0..k {
                    dirty_lines[i][self.line_index(z, i)] = true;
                }
            }
            let dirty_cost: usize = (0..self.color_count)
                .into_par_iter()
                .map(|c| {
                    let mems = &members[offsets[c] as usize..offsets[c + 1] as usize];
                    if mems.len() < 2 {
                        return 0;
                    }
                    let d = mems
                        .iter()
                        .any(|&m| (0..k).any(|i| dirty_lines[i][self.line_index(m, i)]));
                    if d {
                        mems.len()
                    } else {
                        0
                    }
                })
                .sum();
            let delta_records = self.changed.len().saturating_mul(k * n);
            // Per-unit costs: a record is ~10 cheap ops, a full member
            // recompute is ~3n. Delta wins whenever its records fit memory
            // and the change set is not a large fraction of the table.
            let full_cost = dirty_cost.saturating_mul(3 * n);
            let use_delta = match forced_path() {
                1 => false,
                2 => delta_records <= DELTA_RECORD_CAP,
                _ => delta_records <= DELTA_RECORD_CAP && delta_records * 10 < full_cost,
            };
            if use_delta {
                self.delta_round(&offsets, &members)
            } else {
                self.full_round(&offsets, &members, Some(&dirty_lines))
            }
        };

        if splits.is_empty() {
            return false;
        }
        self.apply_splits(splits, &offsets, &members);
        true
    }

    #[inline]
    fn line_index(&self, idx: u32, pos: usize) -> usize {
        let stride = self.space.stride(pos);
        let idx = idx as usize;
        let hi = idx / (stride * self.space.n);
        let lo = idx % stride;
        hi * stride + lo
    }

    fn full_round(
        &self,
        offsets: &[u32],
        members: &[u32],
        dirty_lines: Option<&Vec<Vec<bool>>>,
    ) -> Vec<(u32, Vec<Child>)> {
        let n = self.space.n;
        let k = self.space.k;
        // per-column substitution order for the k = 2 fast path
        let col_order: Option<Vec<u32>> = (k == 2).then(|| {
            let mut order = vec![0u32; n * n];
            order
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(v, chunk)| {
                    for (i, c) in chunk.iter_mut().enumerate() {
                        *c = i as u32;
                    }
                    chunk.sort_unstable_by_key(|&y| {
                        ((self.colors[y as usize * n + v] as u64) << 32) | y as u64
                    });
                });
            order
        });
        let builder = RoundBuilder {
            space: self.space,
            colors: &self.colors,
            row_order: col_order.as_deref(),
        };
        (0..self.color_count)
            .into_par_iter()
            .filter_map(|c| {
                let mems = &members[offsets[c] as usize..offsets[c + 1] as usize];
                if mems.len() < 2 {
                    return None;
                }
                if let Some(lines) = dirty_lines {
                    let dirty = mems
                        .iter()
                        .any(|&m| (0..k).any(|i| lines[i][self.line_index(m, i)]));
                    if !dirty {
                        return None;
                    }
                }
                let groups = group_members(mems, n, &|m, out| builder.build(m, out));
                if groups.len() < 2 {
                    return None;
                }
                Some((c as u32, groups.into_iter().map(Child::Explicit).collect()))
            })
            .collect()
    }

    fn delta_round(&self, offsets: &[u32], members: &[u32]) -> Vec<(u32, Vec<Child>)> {
        let n = self.space.n;
        let k = self.space.k;
        let builder = RoundBuilder {
            space: self.space,
            colors: &self.colors,
            row_order: None,
        };

        // Broadcast: (affected tuple, slot y, position, old color of the
        // changed substitution). The new color is read from `colors`.
        #[derive(Clone, Copy)]
        struct Rec {
            x: u32,
            y: u32,
            pos: u8,
            old: ColorId,
        }
        let mut records: Vec<Rec> = self
            .changed
            .par_iter()
            .flat_map_iter(|&(z, old)| {
                let mut tuple = [0 as VertexId; crate::K_MAX];
                self.space.decode(z as usize, &mut tuple[..k]);
                let space = self.space;
                (0..k).flat_map(move |i| {
                    let slot = tuple[i];
                    let base = z as isize - slot as isize * space.stride(i) as isize;
                    (0..n as u32).map(move |y| Rec {
                        x: (base + y as isize * space.stride(i) as isize) as u32,
                        y: slot,
                        pos: i as u8,
                        old,
                    })
                })
            })
            .collect();
        records.par_sort_unstable_by_key(|r| ((r.x as u64) << 32) | r.y as u64);

        // Gather signed descriptor deltas per affected tuple.
        let mut affected: Vec<(u32, Vec<(u128, i32)>)> = Vec::new();
        let mut i = 0usize;
        while i < records.len() {
            let x = records[i].x;
            let mut delta: Vec<(u128, i32)> = Vec::new();
            while i < records.len() && records[i].x == x {
                let y = records[i].y;
                let cur = builder.current_item(x, y);
                let mut old = cur;
                while i < records.len() && records[i].x == x && records[i].y == y {
                    let r = records[i];
                    let shift = 32 * (k - 1 - r.pos as usize);
                    old = (old & !(0xffff_ffffu128 << shift)) | ((r.old as u128) << shift);
                    i += 1;
                }
                if old != cur {
                    delta.push((old, -1));
                    delta.push((cur, 1));
                }
            }
            delta.sort_unstable();
            // combine equal items, drop zero sums
            let mut canon: Vec<(u128, i32)> = Vec::new();
            for (item, sgn) in delta {
                match canon.last_mut() {
                    Some((it, s)) if *it == item => *s += sgn,
                    _ => canon.push((item, sgn)),
                }
            }
            canon.retain(|&(_, s)| s != 0);
            affected.push((x, canon));
        }

        // Group affected members per parent by their delta.
        affected.sort_by(|a, b| {
            self.colors[a.0 as usize]
                .cmp(&self.colors[b.0 as usize])
                .then_with(|| a.1.cmp(&b.1))
                .then(a.0.cmp(&b.0))
        });
        let mut out: Vec<(u32, Vec<Child>)> = Vec::new();
        let mut start = 0usize;
        while start < affected.len() {
            let parent = self.colors[affected[start].0 as usize];
            let mut end = start;
            while end < affected.len() && self.colors[affected[end].0 as usize] == parent {
                end += 1;
            }
            let slice = &affected[start..end];
            start = end;

            let parent_size = (offsets[parent as usize + 1] - offsets[parent as usize]) as usize;
            // (is_empty_delta, members) runs within the sorted slice
            let mut groups: Vec<(bool, Vec<u32>)> = Vec::new();
            let mut s = 0usize;
            while s < slice.len() {
                let mut e = s;
                while e < slice.len() && slice[e].1 == slice[s].1 {
                    e += 1;
                }
                groups.push((
                    slice[s].1.is_empty(),
                    slice[s..e].iter().map(|a| a.0).collect(),
                ));
                s = e;
            }
            let explicit_count: usize = groups.iter().map(|(_, g)| g.len()).sum();
            let untouched = parent_size - explicit_count;
            let child_count = groups.len()
                + (untouched > 0 && !groups.iter().any(|(emp, _)| *emp)) as usize;
            if child_count < 2 {
                continue;
            }

            // Canonical order needs the full descriptor of one representative
            // per child. Explicit members with an empty delta share the
            // untouched members' descriptor and fold into the Rest child.
            let mems =
                &members[offsets[parent as usize] as usize..offsets[parent as usize + 1] as usize];
            let mut keyed: Vec<(Vec<u128>, Child)> = Vec::new();
            let mut buf = vec![0u128; self.space.n];
            for (emp, g) in groups.into_iter() {
                builder.build(g[0], &mut buf);
                if emp {
                    keyed.push((buf.clone(), Child::Rest));
                } else {
                    keyed.push((buf.clone(), Child::Explicit(g)));
                }
            }
            if untouched > 0 && !keyed.iter().any(|(_, c)| matches!(c, Child::Rest)) {
                let touched: std::collections::HashSet<u32> =
                    slice.iter().map(|a| a.0).collect();
                let rep = mems.iter().copied().find(|m| !touched.contains(m)).unwrap();
                builder.build(rep, &mut buf);
                keyed.push((buf.clone(), Child::Rest));
            }
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            out.push((parent, keyed.into_iter().map(|(_, c)| c).collect()));
        }
        out
    }

    fn apply_splits(
        &mut self,
        splits: Vec<(u32, Vec<Child>)>,
        offsets: &[u32],
        members: &[u32],
    ) {
        let mut split_of: Vec<Option<&Vec<Child>>> = vec![None; self.color_count];
        for (parent, children) in &splits {
            split_of[*parent as usize] = Some(children);
        }
        // Assign new ids in (parent, child rank) order.
        let mut bulk_map = vec![0 as ColorId; self.color_count]; // id for untouched members
        let mut keep_map = vec![0 as ColorId; self.color_count]; // largest-child id
        let mut child_ids: Vec<Vec<ColorId>> = vec![Vec::new(); self.color_count];
        let mut next: ColorId = 0;
        for parent in 0..self.color_count {
            match split_of[parent] {
                None => {
                    bulk_map[parent] = next;
                    keep_map[parent] = next;
                    next += 1;
                }
                Some(children) => {
                    let parent_size =
                        (offsets[parent + 1] - offsets[parent]) as usize;
                    let explicit: usize = children
                        .iter()
                        .map(|c| match c {
                            Child::Explicit(v) => v.len(),
                            Child::Rest => 0,
                        })
                        .sum();
                    let rest_size = parent_size - explicit;
                    let mut ids = Vec::with_capacity(children.len());
                    let mut largest = (0usize, 0 as ColorId);
                    for child in children.iter() {
                        let id = next;
                        next += 1;
                        ids.push(id);
                        let sz = match child {
                            Child::Explicit(v) => v.len(),
                            Child::Rest => rest_size,
                        };
                        if sz > largest.0 {
                            largest = (sz, id);
                        }
                        if matches!(child, Child::Rest) {
                            bulk_map[parent] = id;
                        }
                    }
                    if !children.iter().any(|c| matches!(c, Child::Rest)) {
                        bulk_map[parent] = ids[0]; // every member gets overwritten
                    }
                    keep_map[parent] = largest.1;
                    child_ids[parent] = ids;
                }
            }
        }

        // Rewrite colors: bulk map, then explicit overwrites.
        let bulk = &bulk_map;
        let colors_ptr = &mut self.colors;
        colors_ptr.par_iter_mut().for_each(|c| *c = bulk[*c as usize]);
        let mut changed: Vec<(u32, ColorId)> = Vec::new();
        for (parent, children) in &splits {
            let p = *parent as usize;
            let keep = keep_map[p];
            for (child, &id) in children.iter().zip(child_ids[p].iter()) {
                match child {
                    Child::Explicit(v) => {
                        for &m in v {
                            self.colors[m as usize] = id;
                        }
                        if id != keep {
                            changed.extend(v.iter().map(|&m| (m, keep)));
                        }
                    }
                    Child::Rest => {
                        if id != keep {
                            // enumerate untouched members: bucket minus explicit
                            let explicit: std::collections::HashSet<u32> = children
                                .iter()
                                .filter_map(|c| match c {
                                    Child::Explicit(v) => Some(v.iter().copied()),
                                    Child::Rest => None,
                                })
                                .flatten()
                                .collect();
                            for &m in
                                &members[offsets[p] as usize..offsets[p + 1] as usize]
                            {
                                if !explicit.contains(&m) {
                                    changed.push((m, keep));
                                }
                            }
                        }
                    }
                }
            }
        }
        self.changed = changed;
        self.color_count = next as usize;
        self.rounds += 1;
        self.history.push(self.color_count);
    }

    fn run(mut self, mut first: bool) -> StableColoring {
        while self.color_count < self.space.size {
            if !self.round(first) {
                break;
            }
            first = false;
        }
        StableColoring {
            k: self.space.k,
            n: self.space.n,
            tuple_color: self.colors,
            color_count: self.color_count,
            round_count: self.rounds,
            history: self.history,
        }
    }
}

// ---------------------------------------------------------------------------
// entry points
// ---------------------------------------------------------------------------

fn check_memory(space: &TupleSpace, cfg: &EngineConfig) -> Result<(), WlError> {
    let required = (space.size as u64).saturating_mul(24);
    if required > cfg.memory_cap_bytes {
        return Err(WlError::MemoryBudgetExceeded {
            required,
            cap: cfg.memory_cap_bytes,
        });
    }
    if space.size > u32::MAX as usize {
        return Err(WlError::MemoryBudgetExceeded {
            required,
            cap: cfg.memory_cap_bytes,
        });
    }
    Ok(())
}

fn empty_coloring(k: usize) -> StableColoring {
    StableColoring {
        k,
        n: 0,
        tuple_color: Vec::new(),
        color_count: 0,
        round_count: 0,
        history: vec![0],
    }
}

fn initial_colors(s: &Structure, space: TupleSpace) -> (Vec<ColorId>, usize) {
    let builder = AtomicBuilder::new(s, space);
    let all: Vec<u32> = (0..space.size as u32).collect();
    let groups = group_members(&all, builder.words, &|m, out| builder.build(m, out));
    let mut colors = vec![0 as ColorId; space.size];
    for (id, group) in groups.iter().enumerate() {
        for &m in group {
            colors[m as usize] = id as ColorId;
        }
    }
    (colors, groups.len())
}

pub(super) fn initial_only(
    s: &Structure,
    k: usize,
    cfg: &EngineConfig,
) -> Result<StableColoring, WlError> {
    let n = s.vertex_count();
    if n == 0 {
        return Ok(empty_coloring(k));
    }
    if k == 1 {
        return k1::initial(s);
    }
    let space = TupleSpace::new(n, k).ok_or(WlError::KOutOfRange(k))?;
    check_memory(&space, cfg)?;
    let (colors, count) = initial_colors(s, space);
    Ok(StableColoring {
        k,
        n,
        tuple_color: colors,
        color_count: count,
        round_count: 0,
        history: vec![count],
    })
}

pub(super) fn stable(s: &Structure, k: usize, cfg: &EngineConfig) -> Result<StableColoring, WlError> {
    let n = s.vertex_count();
    if n == 0 {
        return Ok(empty_coloring(k));
    }
    if k == 1 {
        return k1::stable(s);
    }
    let space = TupleSpace::new(n, k).ok_or(WlError::KOutOfRange(k))?;
    check_memory(&space, cfg)?;
    let (colors, count) = initial_colors(s, space);
    Ok(Refiner::new(space, colors, count).run(true))
}

/// Resumes refinement from a table that was stable before the listed tuples
/// were recolored (individualization): the round loop starts directly in the
/// delta regime with exactly those tuples marked changed. `changed` carries
/// (tuple index, the color the rest of its old class keeps); the table must
/// already hold the new colors.
pub(super) fn resume(
    n: usize,
    k: usize,
    table: Vec<ColorId>,
    color_count: usize,
    changed: Vec<(u32, ColorId)>,
    cfg: &EngineConfig,
) -> Result<StableColoring, WlError> {
    let space = TupleSpace::new(n, k).ok_or(WlError::KOutOfRange(k))?;
    check_memory(&space, cfg)?;
    let mut refiner = Refiner::new(space, table, color_count);
    refiner.changed = changed;
    Ok(refiner.run(false))
}

pub(super) fn refine_seeded(
    n: usize,
    k: usize,
    init: &[ColorId],
    cfg: &EngineConfig,
) -> Result<StableColoring, WlError> {
    if k < 2 || k > crate::K_MAX {
        return Err(WlError::KOutOfRange(k));
    }
    if n == 0 {
        return Ok(empty_coloring(k));
    }
    let space = TupleSpace::new(n, k).ok_or(WlError::KOutOfRange(k))?;
    check_memory(&space, cfg)?;
    assert_eq!(init.len(), space.size, "seed table must cover V^k");
    // Canonicalize seed ids by first occurrence so downstream ids are
    // deterministic functions of the seed partition.
    let mut remap: std::collections::HashMap<ColorId, ColorId> = std::collections::HashMap::new();
    let mut colors = Vec::with_capacity(init.len());
    for &c in init {
        let next = remap.len() as ColorId;
        colors.push(*remap.entry(c).or_insert(next));
    }
    let count = remap.len();
    Ok(Refiner::new(space, colors, count).run(true))
}

// ---------------------------------------------------------------------------
// classic color refinement (k = 1)
// ---------------------------------------------------------------------------

mod k1 {
    use super::*;
    use std::collections::BTreeMap;

    struct Adj {
        /// (relation, direction)-tagged adjacency, flattened per vertex.
        items: Vec<Vec<(u32, VertexId)>>,
    }

    fn adjacency(s: &Structure) -> Adj {
        let n = s.vertex_count();
        let mut items: Vec<Vec<(u32, VertexId)>> = vec![Vec::new(); n];
        for (ri, rel) in s.relations().iter().enumerate() {
            if rel.arity != 2 {
                continue;
            }
            for t in rel.tuples() {
                items[t[0] as usize].push((2 * ri as u32, t[1]));
                items[t[1] as usize].push((2 * ri as u32 + 1, t[0]));
            }
        }
        Adj { items }
    }

    fn initial_ids(s: &Structure) -> (Vec<ColorId>, usize) {
        let n = s.vertex_count();
        let keys: Vec<Vec<u64>> = (0..n as VertexId)
            .map(|v| {
                let mut d = vec![s.vertex_color(v) as u64];
                for rel in s.relations().iter().filter(|r| r.arity == 1) {
                    d.push(rel.tuples().any(|t| t[0] == v) as u64);
                }
                d
            })
            .collect();
        intern(keys)
    }

    fn intern<K: Ord>(keys: Vec<K>) -> (Vec<ColorId>, usize) {
        let mut dict: BTreeMap<&K, ColorId> = BTreeMap::new();
        for key in &keys {
            dict.entry(key).or_insert(0);
        }
        let mut next = 0;
        for id in dict.values_mut() {
            *id = next;
            next += 1;
        }
        (keys.iter().map(|k| dict[k]).collect(), next as usize)
    }

    pub(super) fn initial(s: &Structure) -> Result<StableColoring, WlError> {
        let (colors, count) = initial_ids(s);
        Ok(StableColoring {
            k: 1,
            n: s.vertex_count(),
            tuple_color: colors,
            color_count: count,
            round_count: 0,
            history: vec![count],
        })
    }

    pub(super) fn stable(s: &Structure) -> Result<StableColoring, WlError> {
        let n = s.vertex_count();
        let adj = adjacency(s);
        let (mut colors, mut count) = initial_ids(s);
        let mut history = vec![count];
        let mut rounds = 0usize;
        loop {
            let keys: Vec<(ColorId, Vec<u64>)> = (0..n)
                .map(|v| {
                    let mut items: Vec<u64> = adj.items[v]
                        .iter()
                        .map(|&(tag, u)| ((tag as u64) << 32) | colors[u as usize] as u64)
                        .collect();
                    items.sort_unstable();
                    (colors[v], items)
                })
                .collect();
            let (new_colors, new_count) = intern(keys);
            if new_count == count {
                break;
            }
            colors = new_colors;
            count = new_count;
            rounds += 1;
            history.push(count);
        }
        Ok(StableColoring {
            k: 1,
            n,
            tuple_color: colors,
            color_count: count,
            round_count: rounds,
            history,
        })
    }
}
