//! Monotone circuits and their translation into graphs whose WL-split
//! behavior computes the circuit: every node gets a vertex pair, FALSE
//! inputs are pre-split by color, gates become gadgets fed through freshly
//! colored one-way switches, and the output pair feeds back into every TRUE
//! input pair.

use std::collections::BTreeMap;

use super::gates::{gate_gadget, GateKind};
use super::switch::one_way_switch;
use super::GenError;
use crate::structures::{RelName, Structure, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Input(bool),
    And(usize, usize),
    Or(usize, usize),
}

#[derive(Debug, Clone)]
pub struct MonotoneCircuit {
    pub names: Vec<String>,
    pub kinds: Vec<NodeKind>,
    pub output: usize,
}

impl MonotoneCircuit {
    pub fn new(
        names: Vec<String>,
        kinds: Vec<NodeKind>,
        output: usize,
    ) -> Result<MonotoneCircuit, GenError> {
        if names.len() != kinds.len() {
            return Err(GenError::CircuitInvalid("names/kinds length mismatch".into()));
        }
        if output >= names.len() {
            return Err(GenError::CircuitInvalid("output node out of range".into()));
        }
        for (i, k) in kinds.iter().enumerate() {
            match *k {
                NodeKind::Input(_) => {}
                NodeKind::And(a, b) | NodeKind::Or(a, b) => {
                    if a >= i || b >= i {
                        return Err(GenError::CircuitInvalid(format!(
                            "gate {} uses a node that is not defined before it",
                            names[i]
                        )));
                    }
                }
            }
        }
        Ok(MonotoneCircuit {
            names,
            kinds,
            output,
        })
    }

    /// Line format: `input <name> <true|false>`, `and <name> <a> <b>`,
    /// `or <name> <a> <b>`, `output <name>`; `#` comments. Nodes must be
    /// defined before use, which enforces acyclicity.
    pub fn parse(text: &str) -> Result<MonotoneCircuit, GenError> {
        let mut names: Vec<String> = Vec::new();
        let mut kinds: Vec<NodeKind> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut output: Option<usize> = None;
        let bad = |msg: String| GenError::CircuitInvalid(msg);
        for raw in text.lines() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let mut it = line.split_whitespace();
            let Some(tag) = it.next() else { continue };
            match tag {
                "input" | "and" | "or" => {
                    let name = it
                        .next()
                        .ok_or_else(|| bad(format!("{tag}: missing name")))?
                        .to_string();
                    if index.contains_key(&name) {
                        return Err(bad(format!("duplicate node {name}")));
                    }
                    let kind = if tag == "input" {
                        match it.next() {
                            Some("true") => NodeKind::Input(true),
                            Some("false") => NodeKind::Input(false),
                            _ => return Err(bad(format!("input {name}: expected true|false"))),
                        }
                    } else {
                        let a = it
                            .next()
                            .and_then(|t| index.get(t))
                            .copied()
                            .ok_or_else(|| bad(format!("{tag} {name}: unknown operand")))?;
                        let b = it
                            .next()
                            .and_then(|t| index.get(t))
                            .copied()
                            .ok_or_else(|| bad(format!("{tag} {name}: unknown operand")))?;
                        if tag == "and" {
                            NodeKind::And(a, b)
                        } else {
                            NodeKind::Or(a, b)
                        }
                    };
                    if it.next().is_some() {
                        return Err(bad(format!("{tag} {name}: trailing tokens")));
                    }
                    index.insert(name.clone(), names.len());
                    names.push(name);
                    kinds.push(kind);
                }
                "output" => {
                    if output.is_some() {
                        return Err(bad("duplicate output line".into()));
                    }
                    let name = it.next().ok_or_else(|| bad("output: missing name".into()))?;
                    output = Some(
                        *index
                            .get(name)
                            .ok_or_else(|| bad(format!("output names unknown node {name}")))?,
                    );
                }
                _ => return Err(bad(format!("unknown line tag `{tag}`"))),
            }
        }
        let output = output.ok_or_else(|| bad("missing output line".into()))?;
        MonotoneCircuit::new(names, kinds, output)
    }

    pub fn serialize(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for (i, kind) in self.kinds.iter().enumerate() {
            match kind {
                NodeKind::Input(v) => {
                    writeln!(out, "input {} {}", self.names[i], v).unwrap()
                }
                NodeKind::And(a, b) => writeln!(
                    out,
                    "and {} {} {}",
                    self.names[i], self.names[*a], self.names[*b]
                )
                .unwrap(),
                NodeKind::Or(a, b) => writeln!(
                    out,
                    "or {} {} {}",
                    self.names[i], self.names[*a], self.names[*b]
                )
                .unwrap(),
            }
        }
        writeln!(out, "output {}", self.names[self.output]).unwrap();
        out
    }

    pub fn eval(&self) -> Vec<bool> {
        let mut val = vec![false; self.kinds.len()];
        for (i, kind) in self.kinds.iter().enumerate() {
            val[i] = match *kind {
                NodeKind::Input(v) => v,
                NodeKind::And(a, b) => val[a] && val[b],
                NodeKind::Or(a, b) => val[a] || val[b],
            };
        }
        val
    }
}

/// Incremental graph assembly with block-fresh color palettes per gadget
/// copy.
struct Builder {
    colors: Vec<u32>,
    edges: Vec<(VertexId, VertexId)>,
    next_color: u32,
}

impl Builder {
    fn new() -> Builder {
        Builder {
            colors: Vec::new(),
            edges: Vec::new(),
            next_color: 0,
        }
    }

    fn fresh_color(&mut self) -> u32 {
        let c = self.next_color;
        self.next_color += 1;
        c
    }

    fn add_vertex(&mut self, color: u32) -> VertexId {
        let v = self.colors.len() as u32;
        self.colors.push(color);
        v
    }

    /// Splices `piece` in: vertices in `identify` reuse existing globals
    /// (keeping their colors), the rest get fresh ids with a fresh color
    /// block. Returns the piece-to-global vertex map.
    fn instantiate(&mut self, piece: &Structure, identify: &BTreeMap<VertexId, VertexId>) -> Vec<VertexId> {
        let block = self.next_color;
        self.next_color += piece.color_count() as u32;
        let map: Vec<VertexId> = (0..piece.vertex_count() as u32)
            .map(|v| match identify.get(&v) {
                Some(&g) => g,
                None => {
                    let color = block + piece.vertex_color(v);
                    self.add_vertex(color)
                }
            })
            .collect();
        if let Some(rel) = piece.relation(&RelName::Edge(0)) {
            for (u, v) in rel.pairs() {
                if u < v {
                    self.edges
                        .push((map[u as usize], map[v as usize]));
                }
            }
        }
        map
    }

    fn finish(self) -> Structure {
        // compact the palette
        let mut present: Vec<u32> = self.colors.clone();
        present.sort_unstable();
        present.dedup();
        let rank: BTreeMap<u32, u32> = present
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, i as u32))
            .collect();
        let colors: Vec<u32> = self.colors.iter().map(|c| rank[c]).collect();
        Structure::colored_graph(colors.len(), colors, &self.edges, &[])
            .expect("assembly is valid")
    }
}

#[derive(Debug)]
pub struct McvpOutput {
    pub g: Structure,
    pub g_star: Structure,
    /// Node-pair registry: (name, first vertex, second vertex); ids are valid
    /// in both graphs.
    pub registry: Vec<(String, VertexId, VertexId)>,
}

/// Builds G_M and the identification probe G*_M for a monotone circuit.
pub fn mcvp_graph(m: &MonotoneCircuit, k: usize) -> Result<McvpOutput, GenError> {
    if k < 2 {
        return Err(GenError::InvalidInput("k must be at least 2".into()));
    }
    let (g, registry) = assemble(m, k, false)?;
    let (g_star, _) = assemble(m, k, true)?;
    Ok(McvpOutput {
        g,
        g_star,
        registry,
    })
}

fn assemble(
    m: &MonotoneCircuit,
    k: usize,
    with_star: bool,
) -> Result<(Structure, Vec<(String, VertexId, VertexId)>), GenError> {
    let ows = one_way_switch(k)?;
    let val = m.eval();
    let mut b = Builder::new();

    // node pairs first
    let mut pairs: Vec<(VertexId, VertexId)> = Vec::with_capacity(m.kinds.len());
    for kind in m.kinds.iter() {
        match kind {
            NodeKind::Input(false) => {
                // pre-split: two fresh colors
                let c1 = b.fresh_color();
                let c2 = b.fresh_color();
                let v1 = b.add_vertex(c1);
                let v2 = b.add_vertex(c2);
                pairs.push((v1, v2));
            }
            _ => {
                let c = b.fresh_color();
                let v1 = b.add_vertex(c);
                let v2 = b.add_vertex(c);
                pairs.push((v1, v2));
            }
        }
    }

    let wire = |b: &mut Builder, from: (VertexId, VertexId), to: (VertexId, VertexId)| {
        let mut identify = BTreeMap::new();
        identify.insert(ows.input_pair.0, from.0);
        identify.insert(ows.input_pair.1, from.1);
        identify.insert(ows.output_pair.0, to.0);
        identify.insert(ows.output_pair.1, to.1);
        b.instantiate(&ows.structure, &identify);
    };

    for (i, kind) in m.kinds.iter().enumerate() {
        let (ga, gb, gate_kind) = match *kind {
            NodeKind::Input(_) => continue,
            NodeKind::And(a, bb) => (a, bb, GateKind::And),
            NodeKind::Or(a, bb) => (a, bb, GateKind::Or),
        };
        let gate = gate_gadget(gate_kind)?;
        let mut identify = BTreeMap::new();
        identify.insert(gate.output_pair.0, pairs[i].0);
        identify.insert(gate.output_pair.1, pairs[i].1);
        let map = b.instantiate(&gate.structure, &identify);
        let in1 = (
            map[gate.input_pairs[0].0 as usize],
            map[gate.input_pairs[0].1 as usize],
        );
        let in2 = (
            map[gate.input_pairs[1].0 as usize],
            map[gate.input_pairs[1].1 as usize],
        );
        wire(&mut b, pairs[ga], in1);
        wire(&mut b, pairs[gb], in2);
    }

    // feedback: output pair into every TRUE input pair (self-feedback on a
    // trivial circuit whose output is itself an input is skipped: the pair
    // cannot usefully feed itself)
    let c = m.output;
    for (i, kind) in m.kinds.iter().enumerate() {
        if matches!(kind, NodeKind::Input(_)) && val[i] && i != c {
            wire(&mut b, pairs[c], pairs[i]);
        }
    }

    if with_star {
        // probe switch: input is the output pair, output pair fresh with one
        // vertex recolored
        let mut identify = BTreeMap::new();
        identify.insert(ows.input_pair.0, pairs[c].0);
        identify.insert(ows.input_pair.1, pairs[c].1);
        let map = b.instantiate(&ows.structure, &identify);
        let probe = map[ows.output_pair.0 as usize];
        let fresh = b.fresh_color();
        b.colors[probe as usize] = fresh;
    }

    let registry: Vec<(String, VertexId, VertexId)> = m
        .names
        .iter()
        .zip(pairs.iter())
        .map(|(n, &(a, bb))| (n.clone(), a, bb))
        .collect();
    Ok((b.finish(), registry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{wl, EngineConfig};

    fn cfg() -> EngineConfig {
        EngineConfig::default()
    }

    fn pair_split(s: &Structure, pair: (VertexId, VertexId)) -> bool {
        let col = wl::stable_coloring(s, 2, &cfg()).unwrap();
        col.diagonal_color(pair.0) != col.diagonal_color(pair.1)
    }

    #[test]
    fn parse_eval_round_trip() {
        let text = "input a false\ninput b true\nand g a b\nor h g b\noutput h\n";
        let m = MonotoneCircuit::parse(text).unwrap();
        assert_eq!(m.serialize(), text);
        let val = m.eval();
        assert_eq!(val, vec![false, true, false, true]);
    }

    #[test]
    fn rejects_forward_references_and_junk() {
        assert!(MonotoneCircuit::parse("and g a b\noutput g\n").is_err());
        assert!(MonotoneCircuit::parse("input a true\n").is_err()); // no output
        assert!(MonotoneCircuit::parse("input a true\ninput a false\noutput a\n").is_err());
    }

    #[test]
    fn single_and_gate_false() {
        // and of a false and a true input: false output
        let m = MonotoneCircuit::parse(
            "input a false\ninput b true\nand g a b\noutput g\n",
        )
        .unwrap();
        let out = mcvp_graph(&m, 2).unwrap();
        let reg: BTreeMap<&str, (u32, u32)> = out
            .registry
            .iter()
            .map(|(n, a, b)| (n.as_str(), (*a, *b)))
            .collect();
        assert!(pair_split(&out.g, reg["a"]));
        assert!(pair_split(&out.g, reg["g"]), "false gate output must split");
        // with val(c)=false, even the true input's pair splits via feedback
        assert!(pair_split(&out.g, reg["b"]));
    }

    #[test]
    fn single_or_gate_true() {
        let m = MonotoneCircuit::parse(
            "input a false\ninput b true\nor g a b\noutput g\n",
        )
        .unwrap();
        let out = mcvp_graph(&m, 2).unwrap();
        let reg: BTreeMap<&str, (u32, u32)> = out
            .registry
            .iter()
            .map(|(n, a, b)| (n.as_str(), (*a, *b)))
            .collect();
        assert!(pair_split(&out.g, reg["a"]));
        assert!(!pair_split(&out.g, reg["g"]), "true output must stay whole");
        assert!(!pair_split(&out.g, reg["b"]));
    }

    #[test]
    fn bounded_classes() {
        let m = MonotoneCircuit::parse(
            "input a false\ninput b true\nand g a b\nor h g b\noutput h\n",
        )
        .unwrap();
        let out = mcvp_graph(&m, 2).unwrap();
        assert!(out.g.bound_report(false).max_class_size <= 4);
        assert!(out.g_star.bound_report(false).max_class_size <= 4);
    }
}
