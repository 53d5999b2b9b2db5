//! Colored directed graphs and k-ary relational structures: the universal
//! input type of the toolkit, with parsing, canonical serialization, and the
//! combinators the refinement pipelines need.
//!
//! Conventions: vertex ids and color ids are dense 0-based naturals. An
//! edge-colored graph is stored as one binary relation per edge color, so a
//! relational structure is the single internal representation. Undirected
//! graphs keep their edge relations symmetrically closed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

use crate::K_MAX;

pub type VertexId = u32;
pub type ColorId = u32;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("syntax error on line {0}: {1}")]
    Syntax(usize, String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
}

/// Relation identifier. Edge relations are keyed by their edge color so that
/// a colored graph and a hand-written relational structure cannot collide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelName {
    /// Binary adjacency relation carrying one edge color.
    Edge(u32),
    /// A named relation from an `r` line.
    Named(String),
}

impl std::fmt::Display for RelName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RelName::Edge(c) => write!(f, "edge/{c}"),
            RelName::Named(s) => write!(f, "{s}"),
        }
    }
}

/// One relation: tuples stored flat (`arity` entries each), sorted
/// lexicographically and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: RelName,
    pub arity: usize,
    flat: Vec<VertexId>,
}

impl Relation {
    pub fn new(name: RelName, arity: usize, mut tuples: Vec<Vec<VertexId>>) -> Self {
        tuples.sort();
        tuples.dedup();
        let mut flat = Vec::with_capacity(tuples.len() * arity);
        for t in &tuples {
            debug_assert_eq!(t.len(), arity);
            flat.extend_from_slice(t);
        }
        Relation { name, arity, flat }
    }

    pub fn from_pairs(name: RelName, mut pairs: Vec<(VertexId, VertexId)>) -> Self {
        pairs.sort();
        pairs.dedup();
        let mut flat = Vec::with_capacity(pairs.len() * 2);
        for (u, v) in pairs {
            flat.push(u);
            flat.push(v);
        }
        Relation { name, arity: 2, flat }
    }

    pub fn len(&self) -> usize {
        if self.arity == 0 {
            0
        } else {
            self.flat.len() / self.arity
        }
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[VertexId]> + '_ {
        self.flat.chunks_exact(self.arity.max(1))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        debug_assert_eq!(self.arity, 2);
        self.flat.chunks_exact(2).map(|c| (c[0], c[1]))
    }

    /// Membership test; tuples are stored sorted, so this is a binary search.
    pub fn contains(&self, tuple: &[VertexId]) -> bool {
        self.contains_sorted(tuple)
    }

    fn contains_sorted(&self, tuple: &[VertexId]) -> bool {
        let a = self.arity;
        let cnt = self.len();
        let mut lo = 0usize;
        let mut hi = cnt;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let t = &self.flat[mid * a..mid * a + a];
            if t < tuple {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo < cnt && &self.flat[lo * a..lo * a + a] == tuple
    }
}

/// A vertex- and edge-colored directed graph or k-ary relational structure.
/// Immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    n: usize,
    directed: bool,
    vertex_colors: Vec<ColorId>,
    relations: Vec<Relation>,
}

impl Structure {
    /// Validates and builds a structure. Relations are stored in canonical
    /// order (sorted by name); tuples are sorted and deduplicated.
    pub fn new(
        n: usize,
        directed: bool,
        vertex_colors: Vec<ColorId>,
        mut relations: Vec<Relation>,
    ) -> Result<Self, StructureError> {
        if vertex_colors.len() != n {
            return Err(StructureError::Validation(format!(
                "expected {n} vertex colors, got {}",
                vertex_colors.len()
            )));
        }
        relations.sort_by(|a, b| a.name.cmp(&b.name));
        for w in relations.windows(2) {
            if w[0].name == w[1].name {
                return Err(StructureError::Validation(format!(
                    "duplicate relation name {}",
                    w[0].name
                )));
            }
        }
        for rel in &relations {
            if rel.arity == 0 || rel.arity > K_MAX {
                return Err(StructureError::Validation(format!(
                    "relation {} has unsupported arity {}",
                    rel.name, rel.arity
                )));
            }
            for t in rel.tuples() {
                for &v in t {
                    if v as usize >= n {
                        return Err(StructureError::Validation(format!(
                            "relation {} mentions vertex {v} >= {n}",
                            rel.name
                        )));
                    }
                }
                if matches!(rel.name, RelName::Edge(_)) && t[0] == t[1] {
                    return Err(StructureError::Validation(format!(
                        "self-loop ({},{}) in edge relation",
                        t[0], t[1]
                    )));
                }
            }
            if !directed && matches!(rel.name, RelName::Edge(_)) {
                for t in rel.tuples() {
                    if !rel.contains_sorted(&[t[1], t[0]]) {
                        return Err(StructureError::Validation(format!(
                            "undirected edge relation not symmetric at ({},{})",
                            t[0], t[1]
                        )));
                    }
                }
            }
        }
        Ok(Structure {
            n,
            directed,
            vertex_colors,
            relations,
        })
    }

    /// Convenience constructor for an uncolored simple graph given undirected
    /// edges; symmetrizes into the color-0 edge relation.
    pub fn simple_graph(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, StructureError> {
        Self::colored_graph(n, vec![0; n], edges, &[])
    }

    /// Vertex-colored undirected graph with optional per-edge colors.
    pub fn colored_graph(
        n: usize,
        vertex_colors: Vec<ColorId>,
        edges: &[(VertexId, VertexId)],
        edge_colors: &[u32],
    ) -> Result<Self, StructureError> {
        let mut by_color: BTreeMap<u32, Vec<(VertexId, VertexId)>> = BTreeMap::new();
        for (i, &(u, v)) in edges.iter().enumerate() {
            let c = edge_colors.get(i).copied().unwrap_or(0);
            by_color.entry(c).or_default().push((u, v));
            by_color.entry(c).or_default().push((v, u));
        }
        let relations = by_color
            .into_iter()
            .map(|(c, pairs)| Relation::from_pairs(RelName::Edge(c), pairs))
            .collect();
        Self::new(n, false, vertex_colors, relations)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertex_colors(&self) -> &[ColorId] {
        &self.vertex_colors
    }

    pub fn vertex_color(&self, v: VertexId) -> ColorId {
        self.vertex_colors[v as usize]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &RelName) -> Option<&Relation> {
        self.relations.iter().find(|r| &r.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(1)
    }

    /// Number of distinct vertex colors assuming a dense palette; for sparse
    /// palettes this is one past the largest color in use.
    pub fn color_count(&self) -> usize {
        self.vertex_colors
            .iter()
            .map(|&c| c as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// (name, arity) list identifying the relational signature.
    pub fn signature(&self) -> Vec<(RelName, usize)> {
        self.relations
            .iter()
            .map(|r| (r.name.clone(), r.arity))
            .collect()
    }

    /// True when the structure is a plain graph: unary/binary relations only.
    pub fn is_graph(&self) -> bool {
        self.max_arity() <= 2
    }

    /// Relabels vertices along `perm` (new id = perm[old id]).
    pub fn relabel(&self, perm: &[VertexId]) -> Structure {
        assert_eq!(perm.len(), self.n);
        let mut colors = vec![0; self.n];
        for v in 0..self.n {
            colors[perm[v] as usize] = self.vertex_colors[v];
        }
        let relations = self
            .relations
            .iter()
            .map(|r| {
                let tuples = r
                    .tuples()
                    .map(|t| t.iter().map(|&v| perm[v as usize]).collect())
                    .collect();
                Relation::new(r.name.clone(), r.arity, tuples)
            })
            .collect();
        Structure::new(self.n, self.directed, colors, relations).expect("relabel preserves validity")
    }

    /// Returns a copy with vertex `v` recolored to `color`.
    pub fn recolor_vertex(&self, v: VertexId, color: ColorId) -> Structure {
        let mut s = self.clone();
        s.vertex_colors[v as usize] = color;
        s
    }

    /// Induced substructure on `verts` (which must be distinct). Vertices are
    /// renumbered by their position in `verts`; colors are kept as-is.
    pub fn induced(&self, verts: &[VertexId]) -> Structure {
        let mut back = vec![u32::MAX; self.n];
        for (i, &v) in verts.iter().enumerate() {
            back[v as usize] = i as u32;
        }
        let colors = verts.iter().map(|&v| self.vertex_colors[v as usize]).collect();
        let relations = self
            .relations
            .iter()
            .map(|r| {
                let tuples = r
                    .tuples()
                    .filter(|t| t.iter().all(|&v| back[v as usize] != u32::MAX))
                    .map(|t| t.iter().map(|&v| back[v as usize]).collect())
                    .collect();
                Relation::new(r.name.clone(), r.arity, tuples)
            })
            .collect();
        Structure::new(verts.len(), self.directed, colors, relations)
            .expect("induced substructure is valid")
    }

    /// Disjoint union. Both structures must share relation names and arities;
    /// colors are kept verbatim so classes merge exactly when the inputs used
    /// the same color id. Returns the union and the vertex-id offset of `other`.
    pub fn disjoint_union(&self, other: &Structure) -> Result<(Structure, u32), StructureError> {
        if self.signature() != other.signature() {
            return Err(StructureError::SignatureMismatch(format!(
                "{:?} vs {:?}",
                self.signature(),
                other.signature()
            )));
        }
        if self.directed != other.directed {
            return Err(StructureError::SignatureMismatch(
                "directedness differs".into(),
            ));
        }
        let off = self.n as u32;
        let n = self.n + other.n;
        let mut colors = self.vertex_colors.clone();
        colors.extend_from_slice(&other.vertex_colors);
        let relations = self
            .relations
            .iter()
            .zip(other.relations.iter())
            .map(|(a, b)| {
                let mut tuples: Vec<Vec<VertexId>> = a.tuples().map(|t| t.to_vec()).collect();
                tuples.extend(b.tuples().map(|t| t.iter().map(|&v| v + off).collect::<Vec<_>>()));
                Relation::new(a.name.clone(), a.arity, tuples)
            })
            .collect();
        Ok((Structure::new(n, self.directed, colors, relations)?, off))
    }

    /// Canonical text serialization; `parse` inverts it field-by-field.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let dir = if self.directed { "directed" } else { "undirected" };
        writeln!(out, "p struct {} {}", self.n, dir).unwrap();
        for v in 0..self.n {
            if self.vertex_colors[v] != 0 {
                writeln!(out, "v {} {}", v, self.vertex_colors[v]).unwrap();
            }
        }
        for rel in &self.relations {
            match &rel.name {
                RelName::Edge(c) => {
                    for (u, v) in rel.pairs() {
                        if !self.directed && u > v {
                            continue;
                        }
                        if *c == 0 {
                            writeln!(out, "e {u} {v}").unwrap();
                        } else {
                            writeln!(out, "e {u} {v} {c}").unwrap();
                        }
                    }
                }
                RelName::Named(name) => {
                    for t in rel.tuples() {
                        write!(out, "r {} {}", name, rel.arity).unwrap();
                        for &v in t {
                            write!(out, " {v}").unwrap();
                        }
                        writeln!(out).unwrap();
                    }
                }
            }
        }
        out
    }

    /// Parses the line-oriented text format. `#` starts a comment; the single
    /// `p` header must come first.
    pub fn parse(text: &str) -> Result<Structure, StructureError> {
        let mut header: Option<(usize, bool)> = None;
        let mut colors: Vec<ColorId> = Vec::new();
        let mut seen_v: Vec<bool> = Vec::new();
        let mut edge_rels: BTreeMap<u32, Vec<(VertexId, VertexId)>> = BTreeMap::new();
        let mut named: BTreeMap<String, (usize, Vec<Vec<VertexId>>)> = BTreeMap::new();

        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let mut it = line.split_whitespace();
            let Some(tag) = it.next() else { continue };
            let syntax = |msg: &str| StructureError::Syntax(lineno, msg.to_string());
            match tag {
                "p" => {
                    if header.is_some() {
                        return Err(syntax("duplicate p line"));
                    }
                    let kind = it.next().ok_or_else(|| syntax("missing kind"))?;
                    if kind != "struct" && kind != "graph" {
                        return Err(syntax("expected `p struct` or `p graph`"));
                    }
                    let n: usize = it
                        .next()
                        .ok_or_else(|| syntax("missing vertex count"))?
                        .parse()
                        .map_err(|_| syntax("bad vertex count"))?;
                    let dir = match it.next().ok_or_else(|| syntax("missing direction"))? {
                        "directed" => true,
                        "undirected" => false,
                        _ => return Err(syntax("expected directed|undirected")),
                    };
                    if it.next().is_some() {
                        return Err(syntax("trailing tokens on p line"));
                    }
                    header = Some((n, dir));
                    colors = vec![0; n];
                    seen_v = vec![false; n];
                }
                "v" => {
                    let (n, _) = header.ok_or_else(|| syntax("v before p"))?;
                    let id: usize = it
                        .next()
                        .ok_or_else(|| syntax("missing vertex id"))?
                        .parse()
                        .map_err(|_| syntax("bad vertex id"))?;
                    let c: ColorId = it
                        .next()
                        .ok_or_else(|| syntax("missing color"))?
                        .parse()
                        .map_err(|_| syntax("bad color"))?;
                    if it.next().is_some() {
                        return Err(syntax("trailing tokens on v line"));
                    }
                    if id >= n {
                        return Err(StructureError::Validation(format!(
                            "vertex id {id} out of range (n={n})"
                        )));
                    }
                    if seen_v[id] {
                        return Err(StructureError::Validation(format!(
                            "duplicate declaration of vertex {id}"
                        )));
                    }
                    seen_v[id] = true;
                    colors[id] = c;
                }
                "e" => {
                    let (n, dir) = header.ok_or_else(|| syntax("e before p"))?;
                    let u: VertexId = it
                        .next()
                        .ok_or_else(|| syntax("missing endpoint"))?
                        .parse()
                        .map_err(|_| syntax("bad endpoint"))?;
                    let v: VertexId = it
                        .next()
                        .ok_or_else(|| syntax("missing endpoint"))?
                        .parse()
                        .map_err(|_| syntax("bad endpoint"))?;
                    let c: u32 = match it.next() {
                        Some(tok) => tok.parse().map_err(|_| syntax("bad edge color"))?,
                        None => 0,
                    };
                    if it.next().is_some() {
                        return Err(syntax("trailing tokens on e line"));
                    }
                    if u as usize >= n || v as usize >= n {
                        return Err(StructureError::Validation(format!(
                            "edge ({u},{v}) out of range (n={n})"
                        )));
                    }
                    if u == v {
                        return Err(StructureError::Validation(format!("self-loop at {u}")));
                    }
                    let rel = edge_rels.entry(c).or_default();
                    rel.push((u, v));
                    if !dir {
                        rel.push((v, u));
                    }
                }
                "r" => {
                    let (n, _) = header.ok_or_else(|| syntax("r before p"))?;
                    let name = it.next().ok_or_else(|| syntax("missing relation name"))?;
                    let arity: usize = it
                        .next()
                        .ok_or_else(|| syntax("missing arity"))?
                        .parse()
                        .map_err(|_| syntax("bad arity"))?;
                    if arity == 0 || arity > K_MAX {
                        return Err(StructureError::Validation(format!(
                            "arity {arity} outside 1..={K_MAX}"
                        )));
                    }
                    let mut tuple = Vec::with_capacity(arity);
                    for _ in 0..arity {
                        let v: VertexId = it
                            .next()
                            .ok_or_else(|| syntax("tuple shorter than arity"))?
                            .parse()
                            .map_err(|_| syntax("bad tuple entry"))?;
                        if v as usize >= n {
                            return Err(StructureError::Validation(format!(
                                "tuple entry {v} out of range (n={n})"
                            )));
                        }
                        tuple.push(v);
                    }
                    if it.next().is_some() {
                        return Err(syntax("tuple longer than arity"));
                    }
                    let entry = named.entry(name.to_string()).or_insert((arity, Vec::new()));
                    if entry.0 != arity {
                        return Err(StructureError::Validation(format!(
                            "relation {name} used with arities {} and {arity}",
                            entry.0
                        )));
                    }
                    entry.1.push(tuple);
                }
                _ => return Err(syntax(&format!("unknown line tag `{tag}`"))),
            }
        }

        let (n, directed) = header.ok_or(StructureError::Syntax(0, "missing p line".into()))?;
        let mut relations: Vec<Relation> = edge_rels
            .into_iter()
            .map(|(c, pairs)| Relation::from_pairs(RelName::Edge(c), pairs))
            .collect();
        relations.extend(
            named
                .into_iter()
                .map(|(name, (arity, tuples))| Relation::new(RelName::Named(name), arity, tuples)),
        );
        Structure::new(n, directed, colors, relations)
    }
}

/// Summary of the vertex color classes: sizes and, on request, whether each
/// class induces a substructure with an abelian automorphism group.
#[derive(Debug, Clone)]
pub struct ColorClassReport {
    /// (color, class size) for every non-empty class, ascending by color.
    pub class_sizes: Vec<(ColorId, usize)>,
    pub max_class_size: usize,
    /// Parallel to `class_sizes`; `None` when the abelian test was skipped.
    pub abelian_flags: Vec<Option<bool>>,
}

impl Structure {
    /// Members of each non-empty color class, ascending by color.
    pub fn color_classes(&self) -> Vec<(ColorId, Vec<VertexId>)> {
        let mut classes: BTreeMap<ColorId, Vec<VertexId>> = BTreeMap::new();
        for v in 0..self.n {
            classes.entry(self.vertex_colors[v]).or_default().push(v as u32);
        }
        classes.into_iter().collect()
    }

    /// Class-size report. With `with_abelian` set, runs the automorphism
    /// search on every induced class substructure and checks that the
    /// generators pairwise commute.
    pub fn bound_report(&self, with_abelian: bool) -> ColorClassReport {
        let classes = self.color_classes();
        let max_class_size = classes.iter().map(|(_, m)| m.len()).max().unwrap_or(0);
        let mut abelian_flags = Vec::with_capacity(classes.len());
        for (_, members) in &classes {
            if !with_abelian {
                abelian_flags.push(None);
                continue;
            }
            let sub = self.induced(members);
            let flag = crate::groups::automorphism_generators(&sub, &crate::EngineConfig::default())
                .map(|gens| crate::groups::is_abelian(&gens))
                .unwrap_or(false);
            abelian_flags.push(Some(flag));
        }
        ColorClassReport {
            class_sizes: classes.iter().map(|(c, m)| (*c, m.len())).collect(),
            max_class_size,
            abelian_flags,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Structure {
        Structure::simple_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn parse_triangle() {
        let s = Structure::parse("p graph 3 undirected\ne 0 1\ne 1 2\ne 2 0\n").unwrap();
        assert_eq!(s.vertex_count(), 3);
        assert_eq!(s.vertex_colors(), &[0, 0, 0]);
        let edges = s.relation(&RelName::Edge(0)).unwrap();
        assert_eq!(edges.len(), 6); // symmetrized
        assert_eq!(s, k3());
    }

    #[test]
    fn parse_rejects_self_loop() {
        let err = Structure::parse("p struct 5 undirected\ne 4 4\n").unwrap_err();
        assert!(matches!(err, StructureError::Validation(_)));
    }

    #[test]
    fn parse_rejects_duplicate_vertex_and_range() {
        assert!(Structure::parse("p struct 2 undirected\nv 0 1\nv 0 2\n").is_err());
        assert!(Structure::parse("p struct 2 undirected\ne 0 5\n").is_err());
        assert!(Structure::parse("p struct 2 undirected\nv 7 0\n").is_err());
    }

    #[test]
    fn parse_ternary_relation() {
        let s = Structure::parse("p struct 3 directed\nr mult 3 0 1 2\n").unwrap();
        let r = s.relation(&RelName::Named("mult".into())).unwrap();
        assert_eq!(r.arity, 3);
        assert_eq!(r.len(), 1);
        let t = Structure::parse(&s.serialize()).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn serialize_round_trip_k3() {
        let s = k3();
        let t = Structure::parse(&s.serialize()).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn serialize_single_vertex() {
        let s = Structure::new(1, false, vec![0], vec![]).unwrap();
        let text = s.serialize();
        assert_eq!(text, "p struct 1 undirected\n");
        assert_eq!(Structure::parse(&text).unwrap(), s);
    }

    #[test]
    fn union_of_triangles() {
        let (u, off) = k3().disjoint_union(&k3()).unwrap();
        assert_eq!(off, 3);
        assert_eq!(u.vertex_count(), 6);
        assert_eq!(u.relation(&RelName::Edge(0)).unwrap().len(), 12);
    }

    #[test]
    fn union_keeps_disjoint_palettes_disjoint() {
        let a = Structure::colored_graph(2, vec![0, 1], &[(0, 1)], &[]).unwrap();
        let b = Structure::colored_graph(2, vec![2, 3], &[(0, 1)], &[]).unwrap();
        let (u, _) = a.disjoint_union(&b).unwrap();
        let report = u.bound_report(false);
        assert_eq!(
            report.class_sizes,
            vec![(0, 1), (1, 1), (2, 1), (3, 1)]
        );
    }

    #[test]
    fn union_class_sizes_add() {
        let a = Structure::colored_graph(3, vec![0, 0, 1], &[(0, 1)], &[]).unwrap();
        let b = Structure::colored_graph(2, vec![1, 0], &[(0, 1)], &[]).unwrap();
        let (u, _) = a.disjoint_union(&b).unwrap();
        assert_eq!(u.bound_report(false).class_sizes, vec![(0, 3), (1, 2)]);
    }

    #[test]
    fn union_signature_mismatch() {
        let a = k3();
        let b = Structure::new(2, false, vec![0, 0], vec![]).unwrap();
        assert!(a.disjoint_union(&b).is_err());
    }

    #[test]
    fn bound_report_singletons() {
        let s = Structure::colored_graph(3, vec![0, 1, 2], &[(0, 1)], &[]).unwrap();
        let r = s.bound_report(true);
        assert_eq!(r.max_class_size, 1);
        assert!(r.abelian_flags.iter().all(|f| *f == Some(true)));
    }

    #[test]
    fn bound_report_k3_not_abelian() {
        // Aut(K3) = S3 is non-abelian.
        let r = k3().bound_report(true);
        assert_eq!(r.max_class_size, 3);
        assert_eq!(r.abelian_flags, vec![Some(false)]);
    }

    #[test]
    fn induced_substructure() {
        let s = k3();
        let sub = s.induced(&[0, 1]);
        assert_eq!(sub.vertex_count(), 2);
        assert_eq!(sub.relation(&RelName::Edge(0)).unwrap().len(), 2);
    }

    #[test]
    fn relabel_keeps_structure() {
        let s = Structure::colored_graph(3, vec![0, 1, 0], &[(0, 1), (1, 2)], &[]).unwrap();
        let t = s.relabel(&[2, 0, 1]);
        assert_eq!(t.vertex_color(0), 1);
        assert_eq!(t.relation(&RelName::Edge(0)).unwrap().len(), 4);
    }
}
