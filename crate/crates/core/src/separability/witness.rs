//! Extending strict algebraic automorphisms of the star-free core back
//! through the elimination trace, and building + verifying the companion
//! structure that witnesses non-identification.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{AlgebraicMap, SepError, Transcript, Witness};
use crate::coherent::{attach_star_keyed, AttachOutput, Configuration, StarRecord};
use crate::structures::{Relation, Structure};
use crate::{groups, wl, EngineConfig};

/// Replays the elimination trace in reverse on both sides of the map: the
/// source side re-attaches the recorded equivalences, the target side their
/// images, and the map extends by sending (R, I) to (f(R), I). The final
/// source must reproduce the original skeleton up to relabeling; the result
/// is expressed on the original configuration's ids and fully re-verified.
pub fn extend_through_stars(
    original: &Arc<Configuration>,
    records: &[StarRecord],
    reduced: &Configuration,
    f0: &[u32],
) -> Result<AlgebraicMap, SepError> {
    let mut src = clone_config(reduced);
    let mut dst = clone_config(reduced);
    let mut f: Vec<u32> = f0.to_vec();

    for rec in records.iter().rev() {
        // source side: attach the recorded equivalence verbatim
        let src_out = attach_star_keyed(&src, rec)?;
        // target side: attach the f-image of the equivalence
        let rec_img = image_record(&dst, &src, rec, &f)?;
        let dst_out = attach_star_keyed(&dst, &rec_img)?;
        f = extend_map(&src_out, &dst_out, &f)?;
        src = src_out.config;
        dst = dst_out.config;
    }

    if !partition_eq_by_labels(&src, original) {
        return Err(SepError::Internal(
            "trace replay does not reconstruct the original configuration".into(),
        ));
    }
    let src = reorder_by_labels(&src);
    let dst = reorder_by_labels(&dst);
    // align source ids with the original configuration's ids
    let mut to_orig = vec![u32::MAX; src.relation_count];
    for r in 0..src.relation_count as u32 {
        let rep = src.representative(r);
        to_orig[r as usize] = original.table[original.space().index(&rep)];
    }
    let mut map = vec![u32::MAX; original.relation_count];
    for r in 0..src.relation_count {
        map[to_orig[r] as usize] = f[r];
    }
    let target = Arc::new(dst);
    let out = AlgebraicMap {
        source: original.clone(),
        target: target.clone(),
        map,
    };
    out.verify()?;
    Ok(out)
}

fn clone_config(c: &Configuration) -> Configuration {
    Configuration::from_table(c.n, c.k, c.table.clone(), Some(c.vertex_labels.clone()))
}

/// The image of a star record under the current map: same anchor, classes
/// regrouped along the images of the equivalence's binary relations, removed
/// labels reassigned canonically (ascending by class minimum).
fn image_record(
    dst: &Configuration,
    src: &Configuration,
    rec: &StarRecord,
    f: &[u32],
) -> Result<StarRecord, SepError> {
    let src_idx: BTreeMap<u32, u32> = src
        .vertex_labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i as u32))
        .collect();
    let dst_idx: BTreeMap<u32, u32> = dst
        .vertex_labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i as u32))
        .collect();
    // source-side equivalence relations
    let mut class_of: BTreeMap<u32, usize> = BTreeMap::new();
    for (ci, class) in rec.eq_classes.iter().enumerate() {
        for l in class {
            class_of.insert(*l, ci);
        }
    }
    let mut eq_rels: Vec<u32> = Vec::new();
    for a in &rec.anchor_labels {
        for b in &rec.anchor_labels {
            if class_of[a] == class_of[b] {
                let (ia, ib) = (src_idx[a], src_idx[b]);
                let r = src.table[src.space().pair(ia, ib)];
                if !eq_rels.contains(&r) {
                    eq_rels.push(r);
                }
            }
        }
    }
    let img_rels: Vec<u32> = eq_rels.iter().map(|&r| f[r as usize]).collect();
    // group anchor members on the target side along the image relations
    let members: Vec<u32> = rec.anchor_labels.iter().map(|l| dst_idx[l]).collect();
    let mut cls: BTreeMap<u32, u32> = members.iter().map(|&m| (m, m)).collect();
    for &u in &members {
        for &v in &members {
            let r = dst.table[dst.space().pair(u, v)];
            if img_rels.contains(&r) {
                let (a, b) = (cls[&u].min(cls[&v]), cls[&u].max(cls[&v]));
                if a != b {
                    for val in cls.values_mut() {
                        if *val == b {
                            *val = a;
                        }
                    }
                }
            }
        }
    }
    let mut grouped: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &m in &members {
        grouped
            .entry(cls[&m])
            .or_default()
            .push(dst.vertex_labels[m as usize]);
    }
    if grouped.len() != rec.eq_classes.len() {
        return Err(SepError::Internal(
            "image equivalence has the wrong number of classes".into(),
        ));
    }
    let mut classes: Vec<Vec<u32>> = grouped
        .into_values()
        .map(|mut v| {
            v.sort_unstable();
            v
        })
        .collect();
    classes.sort();
    let mut labels = rec.class_to_label.clone();
    labels.sort_unstable();
    Ok(StarRecord {
        removed_fiber: rec.removed_fiber,
        anchor_fiber: rec.anchor_fiber,
        star_relation: rec.star_relation,
        removed_labels: labels.clone(),
        anchor_labels: rec.anchor_labels.clone(),
        eq_classes: classes,
        class_to_label: labels,
    })
}

/// f(R^(I)) := (f(R))^(I), resolved through the attach keys.
fn extend_map(src: &AttachOutput, dst: &AttachOutput, f: &[u32]) -> Result<Vec<u32>, SepError> {
    let dst_id: BTreeMap<u64, u32> = dst
        .rel_keys
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, i as u32))
        .collect();
    let mut out = vec![u32::MAX; src.config.relation_count];
    for (i, &key) in src.rel_keys.iter().enumerate() {
        let (canon, mask) = ((key >> 16) as u32, (key & 0xffff) as u16);
        let reach = src
            .reach
            .get(&(canon, mask))
            .cloned()
            .unwrap_or_else(|| vec![canon]);
        let mut image: Vec<u32> = reach.iter().map(|&r| f[r as usize]).collect();
        image.sort_unstable();
        let target_key = ((image[0] as u64) << 16) | mask as u64;
        let id = dst_id.get(&target_key).copied().ok_or_else(|| {
            SepError::Internal(format!(
                "extension inconsistent: image relation ({},{mask:b}) missing",
                image[0]
            ))
        })?;
        // the image reachable set must match the target's
        if let Some(dreach) = dst.reach.get(&(image[0], mask)) {
            if dreach != &image {
                return Err(SepError::Internal(
                    "extension inconsistent: reachable sets differ".into(),
                ));
            }
        }
        out[i] = id;
    }
    let mut seen = vec![false; out.len()];
    for &t in &out {
        if t == u32::MAX || seen[t as usize] {
            return Err(SepError::Internal("extension is not a bijection".into()));
        }
        seen[t as usize] = true;
    }
    Ok(out)
}

/// Same partition after aligning vertices by their labels.
pub(super) fn partition_eq_by_labels(a: &Configuration, b: &Configuration) -> bool {
    if a.n != b.n || a.k != b.k || a.relation_count != b.relation_count {
        return false;
    }
    let mut pos: BTreeMap<u32, u32> = BTreeMap::new();
    for (i, &l) in b.vertex_labels.iter().enumerate() {
        pos.insert(l, i as u32);
    }
    let Some(to_b) = a
        .vertex_labels
        .iter()
        .map(|l| pos.get(l).copied())
        .collect::<Option<Vec<u32>>>()
    else {
        return false;
    };
    let space = a.space();
    let mut fwd = vec![u32::MAX; a.relation_count];
    let mut bwd = vec![u32::MAX; b.relation_count];
    let mut tuple = vec![0u32; a.k];
    for idx in 0..space.size {
        space.decode(idx, &mut tuple);
        let b_idx = space.index(&tuple.iter().map(|&v| to_b[v as usize]).collect::<Vec<_>>());
        let (x, y) = (a.table[idx], b.table[b_idx]);
        if fwd[x as usize] == u32::MAX {
            fwd[x as usize] = y;
        } else if fwd[x as usize] != y {
            return false;
        }
        if bwd[y as usize] == u32::MAX {
            bwd[y as usize] = x;
        } else if bwd[y as usize] != x {
            return false;
        }
    }
    true
}

/// Reindexes vertices so labels become the identity (labels must be a
/// permutation of 0..n).
fn reorder_by_labels(c: &Configuration) -> Configuration {
    let n = c.n;
    let mut to_new = vec![u32::MAX; n];
    for (i, &l) in c.vertex_labels.iter().enumerate() {
        assert!((l as usize) < n, "labels must form a permutation here");
        to_new[i] = l;
    }
    let space = c.space();
    let mut table = vec![0u32; space.size];
    let mut tuple = vec![0u32; c.k];
    for idx in 0..space.size {
        space.decode(idx, &mut tuple);
        let new_idx = space.index(&tuple.iter().map(|&v| to_new[v as usize]).collect::<Vec<_>>());
        table[new_idx] = c.table[idx];
    }
    Configuration::from_table(n, c.k, table, None)
}

/// Replaces every relation of `g` by the image of its basis relations under
/// the map's level-appropriate skeleton action, then verifies the companion:
/// not isomorphic to `g`, yet WL[k]-equivalent. Verification failures are
/// hard errors; a `Witness` is only ever returned with a passing transcript.
pub fn build_witness(
    g: &Structure,
    fhat: &AlgebraicMap,
    k: usize,
    mode: &str,
    cfg: &EngineConfig,
) -> Result<Witness, SepError> {
    let source = &fhat.source;
    let target = &fhat.target;
    let n = g.vertex_count();
    assert_eq!(source.n, n);
    let l = source.k;
    let mut relations: Vec<Relation> = Vec::new();
    for rel in g.relations() {
        let a = rel.arity;
        if a == 1 {
            // arity-1 relations are unions of fibers, fixed by strict maps
            relations.push(rel.clone());
            continue;
        }
        assert!(a <= l);
        // source basis relations (at level a) contained in this relation
        let mut contained = vec![false; source.relation_count];
        let mut known = vec![false; source.relation_count];
        let sub = wl::TupleSpace::new(n, a).expect("supported arity");
        let mut tuple = vec![0u32; a];
        let mut image_of: Vec<bool> = vec![false; target.relation_count];
        for idx in 0..sub.size {
            sub.decode(idx, &mut tuple);
            let mut padded = vec![tuple[a - 1]; l];
            padded[..a].copy_from_slice(&tuple);
            let r = source.table[source.space().index(&padded)] as usize;
            if !known[r] {
                known[r] = true;
                contained[r] = rel.contains(&tuple);
                if contained[r] {
                    image_of[fhat.map[r] as usize] = true;
                }
            } else {
                debug_assert_eq!(
                    contained[r],
                    rel.contains(&tuple),
                    "relation must be a union of basis relations"
                );
            }
        }
        // collect the image tuples
        let mut tuples: Vec<Vec<u32>> = Vec::new();
        for idx in 0..sub.size {
            sub.decode(idx, &mut tuple);
            let mut padded = vec![tuple[a - 1]; l];
            padded[..a].copy_from_slice(&tuple);
            let t = target.table[target.space().index(&padded)] as usize;
            if image_of[t] {
                tuples.push(tuple.clone());
            }
        }
        relations.push(Relation::new(rel.name.clone(), a, tuples));
    }
    let companion = Structure::new(n, g.is_directed(), g.vertex_colors().to_vec(), relations)
        .map_err(|e| SepError::Internal(format!("companion construction failed: {e}")))?;

    // mandatory verification
    let iso = groups::isomorphic(g, &companion, cfg)?;
    if iso.is_some() {
        return Err(SepError::WitnessVerificationFailed(
            "companion is isomorphic to the input".into(),
        ));
    }
    let equiv = wl::equivalent(g, &companion, k, cfg)?;
    if !equiv.equivalent {
        return Err(SepError::WitnessVerificationFailed(
            "companion is distinguished from the input".into(),
        ));
    }
    Ok(Witness {
        companion,
        transcript: Transcript {
            k,
            mode: mode.to_string(),
            isomorphic: false,
            equivalent: true,
        },
    })
}
