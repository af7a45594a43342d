//! Combinatorial graph cobordisms.
//!
//! A graph is a finite set of vertices and half-edges with a fixed-point-free
//! involution pairing half-edges into edges, an incidence map, and ordered
//! lists of incoming/outgoing leg vertices of arity at most one. A fat graph
//! adds a cyclic order of the half-edges at each vertex and determines a
//! thickened oriented surface.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("no such edge {0}")]
    NoSuchEdge(String),
    #[error("cannot collapse a tadpole")]
    TadpoleCollapse,
    #[error("collapse would merge external vertices illegally: {0}")]
    ExternalCollapse(String),
    #[error("leg lists do not match: {0}")]
    ArityMismatch(String),
    #[error("id clash between graphs: {0}")]
    IdClash(String),
    #[error("unknown generator name `{0}`")]
    UnknownGenerator(String),
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfEdgeId(pub String);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
impl fmt::Display for HalfEdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn v(id: &str) -> VertexId {
    VertexId(id.to_string())
}
pub fn h(id: &str) -> HalfEdgeId {
    HalfEdgeId(id.to_string())
}

/// An edge: the unordered σ-orbit `{h, σh}` stored as the sorted pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub HalfEdgeId, pub HalfEdgeId);

impl EdgeId {
    pub fn new(a: HalfEdgeId, b: HalfEdgeId) -> Self {
        if a <= b {
            EdgeId(a, b)
        } else {
            EdgeId(b, a)
        }
    }
    pub fn contains(&self, h: &HalfEdgeId) -> bool {
        &self.0 == h || &self.1 == h
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: BTreeSet<VertexId>,
    sigma: BTreeMap<HalfEdgeId, HalfEdgeId>,
    s: BTreeMap<HalfEdgeId, VertexId>,
    legs_in: Vec<VertexId>,
    legs_out: Vec<VertexId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidityReport {
    pub violations: Vec<String>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    In,
    Out,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::In => Side::Out,
            Side::Out => Side::In,
        }
    }
}

impl Graph {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        pairs: impl IntoIterator<Item = (HalfEdgeId, VertexId, HalfEdgeId, VertexId)>,
        legs_in: Vec<VertexId>,
        legs_out: Vec<VertexId>,
    ) -> Result<Graph> {
        let mut g = Graph {
            vertices: vertices.into_iter().collect(),
            sigma: BTreeMap::new(),
            s: BTreeMap::new(),
            legs_in,
            legs_out,
        };
        for (h1, v1, h2, v2) in pairs {
            if g.sigma.contains_key(&h1) || g.sigma.contains_key(&h2) || h1 == h2 {
                return Err(GraphError::Invalid(format!(
                    "half-edge pair ({h1},{h2}) reuses an id"
                )));
            }
            g.sigma.insert(h1.clone(), h2.clone());
            g.sigma.insert(h2.clone(), h1.clone());
            g.s.insert(h1, v1);
            g.s.insert(h2, v2);
        }
        let report = g.validate();
        if !report.is_valid() {
            return Err(GraphError::Invalid(report.violations.join("; ")));
        }
        Ok(g)
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }
    pub fn half_edges(&self) -> impl Iterator<Item = &HalfEdgeId> {
        self.sigma.keys()
    }
    pub fn sigma(&self, h: &HalfEdgeId) -> Option<&HalfEdgeId> {
        self.sigma.get(h)
    }
    pub fn incidence(&self, h: &HalfEdgeId) -> Option<&VertexId> {
        self.s.get(h)
    }
    pub fn legs_in(&self) -> &[VertexId] {
        &self.legs_in
    }
    pub fn legs_out(&self) -> &[VertexId] {
        &self.legs_out
    }
    pub fn legs(&self, side: Side) -> &[VertexId] {
        match side {
            Side::In => &self.legs_in,
            Side::Out => &self.legs_out,
        }
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        let mut out = BTreeSet::new();
        for (h1, h2) in &self.sigma {
            out.insert(EdgeId::new(h1.clone(), h2.clone()));
        }
        out.into_iter().collect()
    }

    pub fn edge_count(&self) -> usize {
        self.sigma.len() / 2
    }

    pub fn arity(&self, v: &VertexId) -> usize {
        self.s.values().filter(|w| *w == v).count()
    }

    pub fn incident_half_edges(&self, v: &VertexId) -> Vec<HalfEdgeId> {
        self.s
            .iter()
            .filter(|(_, w)| *w == v)
            .map(|(h, _)| h.clone())
            .collect()
    }

    pub fn is_leg(&self, v: &VertexId) -> bool {
        self.legs_in.contains(v) || self.legs_out.contains(v)
    }

    /// Vertices not on the given leg list (internal plus other-side legs).
    pub fn vertices_off_side(&self, side: Side) -> Vec<VertexId> {
        self.vertices
            .iter()
            .filter(|v| !self.legs(side).contains(v))
            .cloned()
            .collect()
    }

    pub fn validate(&self) -> ValidityReport {
        let mut violations = Vec::new();
        for (h1, h2) in &self.sigma {
            if h1 == h2 {
                violations.push(format!("involution has fixed point at {h1}"));
            }
            match self.sigma.get(h2) {
                Some(back) if back == h1 => {}
                _ => violations.push(format!("sigma not an involution at {h1}")),
            }
            if !self.s.contains_key(h1) {
                violations.push(format!("incidence missing for {h1}"));
            }
        }
        for (h, v) in &self.s {
            if !self.sigma.contains_key(h) {
                violations.push(format!("incidence on unknown half-edge {h}"));
            }
            if !self.vertices.contains(v) {
                violations.push(format!("incidence of {h} hits unknown vertex {v}"));
            }
        }
        for (name, list) in [("in", &self.legs_in), ("out", &self.legs_out)] {
            let mut seen = BTreeSet::new();
            for v in list {
                if !self.vertices.contains(v) {
                    violations.push(format!("{name}-leg {v} is not a vertex"));
                }
                if !seen.insert(v.clone()) {
                    violations.push(format!("{name}-leg {v} listed twice"));
                }
                if self.arity(v) > 1 {
                    violations.push(format!("leg vertex {v} has arity {}", self.arity(v)));
                }
            }
        }
        for v in &self.legs_in {
            if self.legs_out.contains(v) && self.arity(v) != 0 {
                violations.push(format!("vertex {v} in both leg lists has arity > 0"));
            }
        }
        ValidityReport { violations }
    }

    pub fn has_tadpole(&self) -> bool {
        self.edges()
            .iter()
            .any(|e| self.s.get(&e.0) == self.s.get(&e.1))
    }

    pub fn is_tadpole(&self, e: &EdgeId) -> bool {
        self.s.get(&e.0) == self.s.get(&e.1)
    }

    /// Partition of the vertex set into connected components.
    pub fn components(&self) -> Vec<BTreeSet<VertexId>> {
        let mut parent: BTreeMap<VertexId, VertexId> = self
            .vertices
            .iter()
            .map(|v| (v.clone(), v.clone()))
            .collect();
        fn find(parent: &mut BTreeMap<VertexId, VertexId>, v: &VertexId) -> VertexId {
            let p = parent[v].clone();
            if &p == v {
                return p;
            }
            let root = find(parent, &p);
            parent.insert(v.clone(), root.clone());
            root
        }
        for e in self.edges() {
            let a = find(&mut parent, &self.s[&e.0]);
            let b = find(&mut parent, &self.s[&e.1]);
            if a != b {
                parent.insert(a, b);
            }
        }
        let mut groups: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for v in &self.vertices {
            let root = find(&mut parent, v);
            groups.entry(root).or_default().insert(v.clone());
        }
        groups.into_values().collect()
    }

    /// `π_1(|G|) = 1` at every basepoint: cycle rank zero.
    pub fn is_forest(&self) -> bool {
        let comps = self.components().len();
        self.edge_count() + comps == self.vertices.len()
    }

    /// Relative Euler characteristic `χ = |V∖L_side| - |E|`.
    pub fn euler_char_rel(&self, side: Side) -> i64 {
        self.vertices_off_side(side).len() as i64 - self.edge_count() as i64
    }

    /// Collapse a non-tadpole edge, keeping `survivor` as the merged vertex's
    /// name. Legality follows graph morphisms: leg lists must stay bijective
    /// and leg arities at most one.
    pub fn collapse_edge(&self, e: &EdgeId, survivor: &VertexId) -> Result<Graph> {
        if self.sigma.get(&e.0) != Some(&e.1) {
            return Err(GraphError::NoSuchEdge(e.to_string()));
        }
        let a = self.s[&e.0].clone();
        let b = self.s[&e.1].clone();
        if a == b {
            return Err(GraphError::TadpoleCollapse);
        }
        if survivor != &a && survivor != &b {
            return Err(GraphError::Invalid(format!(
                "survivor {survivor} is not an endpoint of {e}"
            )));
        }
        let deleted = if survivor == &a { b.clone() } else { a.clone() };
        let in_a = self.legs_in.contains(&a);
        let in_b = self.legs_in.contains(&b);
        let out_a = self.legs_out.contains(&a);
        let out_b = self.legs_out.contains(&b);
        if in_a && in_b {
            return Err(GraphError::ExternalCollapse(format!(
                "both endpoints of {e} are incoming legs"
            )));
        }
        if out_a && out_b {
            return Err(GraphError::ExternalCollapse(format!(
                "both endpoints of {e} are outgoing legs"
            )));
        }
        let merged_arity = self.arity(&a) + self.arity(&b) - 2;
        let merged_is_leg = in_a || in_b || out_a || out_b;
        if merged_is_leg && merged_arity > 1 {
            return Err(GraphError::ExternalCollapse(format!(
                "merging across {e} gives a leg of arity {merged_arity}"
            )));
        }
        if (in_a || in_b) && (out_a || out_b) && merged_arity != 0 {
            return Err(GraphError::ExternalCollapse(format!(
                "merging across {e} gives an in/out leg of arity {merged_arity}"
            )));
        }
        let mut g = self.clone();
        g.sigma.remove(&e.0);
        g.sigma.remove(&e.1);
        g.s.remove(&e.0);
        g.s.remove(&e.1);
        for w in g.s.values_mut() {
            if *w == deleted {
                *w = survivor.clone();
            }
        }
        g.vertices.remove(&deleted);
        for list in [&mut g.legs_in, &mut g.legs_out] {
            for w in list.iter_mut() {
                if *w == deleted {
                    *w = survivor.clone();
                }
            }
        }
        Ok(g)
    }

    /// Glue the outgoing legs of `self` onto the incoming legs of `second`,
    /// positionally. Ids must be disjoint; a merged vertex keeps the name of
    /// the out-leg of `self`.
    pub fn glue(&self, second: &Graph) -> Result<Graph> {
        if self.legs_out.len() != second.legs_in.len() {
            return Err(GraphError::ArityMismatch(format!(
                "{} outgoing legs vs {} incoming legs",
                self.legs_out.len(),
                second.legs_in.len()
            )));
        }
        self.check_disjoint(second)?;
        let mut vertices = self.vertices.clone();
        let mut sigma = self.sigma.clone();
        let mut s = self.s.clone();
        let rename: BTreeMap<VertexId, VertexId> = second
            .legs_in
            .iter()
            .cloned()
            .zip(self.legs_out.iter().cloned())
            .collect();
        for v in &second.vertices {
            if !rename.contains_key(v) {
                vertices.insert(v.clone());
            }
        }
        sigma.extend(second.sigma.clone());
        for (h, w) in &second.s {
            let w2 = rename.get(w).cloned().unwrap_or_else(|| w.clone());
            s.insert(h.clone(), w2);
        }
        let legs_in = self.legs_in.clone();
        let legs_out = second
            .legs_out
            .iter()
            .map(|w| rename.get(w).cloned().unwrap_or_else(|| w.clone()))
            .collect();
        let g = Graph {
            vertices,
            sigma,
            s,
            legs_in,
            legs_out,
        };
        let report = g.validate();
        if !report.is_valid() {
            return Err(GraphError::Invalid(format!(
                "glue produced invalid graph: {}",
                report.violations.join("; ")
            )));
        }
        Ok(g)
    }

    pub fn disjoint_union(&self, other: &Graph) -> Result<Graph> {
        self.check_disjoint(other)?;
        let mut g = self.clone();
        g.vertices.extend(other.vertices.iter().cloned());
        g.sigma.extend(other.sigma.clone());
        g.s.extend(other.s.clone());
        g.legs_in.extend(other.legs_in.iter().cloned());
        g.legs_out.extend(other.legs_out.iter().cloned());
        Ok(g)
    }

    fn check_disjoint(&self, other: &Graph) -> Result<()> {
        if let Some(v) = self.vertices.intersection(&other.vertices).next() {
            return Err(GraphError::IdClash(format!("vertex {v}")));
        }
        for h in other.sigma.keys() {
            if self.sigma.contains_key(h) {
                return Err(GraphError::IdClash(format!("half-edge {h}")));
            }
        }
        Ok(())
    }

    /// Clone with every id prefixed; used to namespace before glue/union.
    pub fn prefixed(&self, prefix: &str) -> Graph {
        let pv = |v: &VertexId| VertexId(format!("{prefix}{}", v.0));
        let ph = |h: &HalfEdgeId| HalfEdgeId(format!("{prefix}{}", h.0));
        Graph {
            vertices: self.vertices.iter().map(pv).collect(),
            sigma: self.sigma.iter().map(|(a, b)| (ph(a), ph(b))).collect(),
            s: self.s.iter().map(|(h, w)| (ph(h), pv(w))).collect(),
            legs_in: self.legs_in.iter().map(pv).collect(),
            legs_out: self.legs_out.iter().map(pv).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Fat graphs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FatGraph {
    graph: Graph,
    cyclic: BTreeMap<VertexId, Vec<HalfEdgeId>>,
}

impl FatGraph {
    pub fn new(graph: Graph, cyclic: BTreeMap<VertexId, Vec<HalfEdgeId>>) -> Result<FatGraph> {
        let fg = FatGraph { graph, cyclic };
        let report = fg.validate();
        if !report.is_valid() {
            return Err(GraphError::Invalid(report.violations.join("; ")));
        }
        Ok(fg)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn cyclic(&self) -> &BTreeMap<VertexId, Vec<HalfEdgeId>> {
        &self.cyclic
    }

    pub fn validate(&self) -> ValidityReport {
        let mut report = self.graph.validate();
        for v in self.graph.vertices() {
            let incident: BTreeSet<HalfEdgeId> =
                self.graph.incident_half_edges(v).into_iter().collect();
            match self.cyclic.get(v) {
                None if incident.is_empty() => {}
                None => report
                    .violations
                    .push(format!("missing cyclic order at {v}")),
                Some(order) => {
                    let listed: BTreeSet<HalfEdgeId> = order.iter().cloned().collect();
                    if listed != incident || listed.len() != order.len() {
                        report.violations.push(format!(
                            "cyclic order at {v} is not a permutation of its half-edges"
                        ));
                    }
                }
            }
        }
        report
    }

    fn cyclic_next(&self, h: &HalfEdgeId) -> HalfEdgeId {
        let v = &self.graph.s[h];
        let order = &self.cyclic[v];
        let pos = order.iter().position(|x| x == h).unwrap();
        order[(pos + 1) % order.len()].clone()
    }

    /// Boundary face walks: orbits of `h ↦ succ_{s(σh)}(σh)`.
    pub fn boundary_cycles(&self) -> Vec<Vec<HalfEdgeId>> {
        let mut remaining: BTreeSet<HalfEdgeId> = self.graph.sigma.keys().cloned().collect();
        let mut faces = Vec::new();
        while let Some(start) = remaining.iter().next().cloned() {
            let mut face = Vec::new();
            let mut cur = start.clone();
            loop {
                remaining.remove(&cur);
                face.push(cur.clone());
                let op = self.graph.sigma[&cur].clone();
                cur = self.cyclic_next(&op);
                if cur == start {
                    break;
                }
            }
            faces.push(face);
        }
        faces
    }

    /// Genus of each connected component as a thickened surface, in the
    /// order of [`Graph::components`].
    pub fn component_genera(&self) -> Vec<(BTreeSet<VertexId>, i64)> {
        let comps = self.graph.components();
        let faces = self.boundary_cycles();
        comps
            .into_iter()
            .map(|comp| {
                let e = self
                    .graph
                    .edges()
                    .iter()
                    .filter(|e| comp.contains(&self.graph.s[&e.0]))
                    .count() as i64;
                let v = comp.len() as i64;
                let b = if e == 0 {
                    // bare vertices thicken to disks
                    v
                } else {
                    faces
                        .iter()
                        .filter(|f| comp.contains(&self.graph.s[&f[0]]))
                        .count() as i64
                };
                let genus = (2 - (v - e) - b) / 2;
                (comp, genus)
            })
            .collect()
    }

    pub fn genus(&self) -> i64 {
        self.component_genera().iter().map(|(_, g)| g).sum()
    }

    /// Strip-embeddability with the given leg orders (defaults to the
    /// graph's own lists): every component has genus zero, each legged
    /// component exposes all its legs on a single face whose order matches
    /// the global cyclic word `in-legs in order, out-legs reversed`, and
    /// distinct components partition that word without crossings.
    pub fn is_planar_ordered(
        &self,
        in_order: Option<&[VertexId]>,
        out_order: Option<&[VertexId]>,
    ) -> bool {
        let ins = in_order.unwrap_or(self.graph.legs_in());
        let outs = out_order.unwrap_or(self.graph.legs_out());
        if self.component_genera().iter().any(|(_, g)| *g != 0) {
            return false;
        }
        // a vertex in both leg lists is a through-strand and occupies two
        // boundary attachment points, so it appears twice in the word
        let mut word: Vec<VertexId> = ins.to_vec();
        word.extend(outs.iter().rev().cloned());
        let comps = self.graph.components();
        let comp_of = |v: &VertexId| comps.iter().position(|c| c.contains(v)).unwrap();

        // non-crossing partition of the cyclic word by components
        let labels: Vec<usize> = word.iter().map(comp_of).collect();
        let distinct: BTreeSet<usize> = labels.iter().copied().collect();
        for &x in &distinct {
            for &y in &distinct {
                if x >= y {
                    continue;
                }
                let xs: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == x).collect();
                let ys: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == y).collect();
                if xs.len() >= 2 {
                    let mut arcs = vec![0usize; xs.len()];
                    'outer: for &yi in &ys {
                        for (ai, w) in xs.windows(2).enumerate() {
                            if yi > w[0] && yi < w[1] {
                                arcs[ai + 1] += 1;
                                continue 'outer;
                            }
                        }
                        arcs[0] += 1;
                    }
                    if arcs.iter().filter(|&&c| c > 0).count() > 1 {
                        return false;
                    }
                }
            }
        }

        // per-component: all legs on one face in the induced cyclic order
        let faces = self.boundary_cycles();
        for comp in &comps {
            let comp_word: Vec<VertexId> =
                word.iter().filter(|v| comp.contains(v)).cloned().collect();
            if comp_word.len() <= 1 {
                continue;
            }
            let leg_half = |v: &VertexId| -> Option<HalfEdgeId> {
                self.graph.incident_half_edges(v).into_iter().next()
            };
            let Some(first_half) = leg_half(&comp_word[0]) else {
                // arity-0 leg vertex: single strand or isolated; fine
                continue;
            };
            let Some(face) = faces.iter().find(|f| f.contains(&first_half)) else {
                return false;
            };
            let visit: Vec<VertexId> = face
                .iter()
                .filter(|h| comp_word.contains(&self.graph.s[*h]))
                .map(|h| self.graph.s[h].clone())
                .collect();
            if visit.len() != comp_word.len() {
                return false;
            }
            let n = visit.len();
            let matched =
                (0..n).any(|rot| (0..n).all(|i| visit[(rot + i) % n] == comp_word[i]));
            if !matched {
                return false;
            }
        }
        true
    }

    pub fn collapse_edge(&self, e: &EdgeId, survivor: &VertexId) -> Result<FatGraph> {
        let g = self.graph.collapse_edge(e, survivor)?;
        let a = self.graph.s[&e.0].clone();
        let (h_surv, h_del, deleted) = if survivor == &a {
            (e.0.clone(), e.1.clone(), self.graph.s[&e.1].clone())
        } else {
            (e.1.clone(), e.0.clone(), a)
        };
        let rot = |order: &[HalfEdgeId], anchor: &HalfEdgeId| -> Vec<HalfEdgeId> {
            let pos = order.iter().position(|x| x == anchor).unwrap();
            let mut out: Vec<HalfEdgeId> = Vec::new();
            for i in 1..order.len() {
                out.push(order[(pos + i) % order.len()].clone());
            }
            out
        };
        let mut cyclic = self.cyclic.clone();
        let surv_order = rot(&cyclic[survivor], &h_surv);
        let del_order = rot(&cyclic[&deleted], &h_del);
        cyclic.remove(&deleted);
        let mut merged = surv_order;
        merged.extend(del_order);
        if merged.is_empty() {
            cyclic.remove(survivor);
        } else {
            cyclic.insert(survivor.clone(), merged);
        }
        FatGraph::new(g, cyclic)
    }

    pub fn glue(&self, second: &FatGraph) -> Result<FatGraph> {
        let g = self.graph.glue(&second.graph)?;
        let rename: BTreeMap<VertexId, VertexId> = second
            .graph
            .legs_in
            .iter()
            .cloned()
            .zip(self.graph.legs_out.iter().cloned())
            .collect();
        let mut cyclic = self.cyclic.clone();
        for (v, order) in &second.cyclic {
            let v2 = rename.get(v).cloned().unwrap_or_else(|| v.clone());
            match cyclic.get_mut(&v2) {
                Some(existing) => existing.extend(order.iter().cloned()),
                None => {
                    cyclic.insert(v2, order.clone());
                }
            }
        }
        FatGraph::new(g, cyclic)
    }

    pub fn disjoint_union(&self, other: &FatGraph) -> Result<FatGraph> {
        let g = self.graph.disjoint_union(&other.graph)?;
        let mut cyclic = self.cyclic.clone();
        cyclic.extend(other.cyclic.clone());
        FatGraph::new(g, cyclic)
    }

    pub fn prefixed(&self, prefix: &str) -> FatGraph {
        let g = self.graph.prefixed(prefix);
        let pv = |v: &VertexId| VertexId(format!("{prefix}{}", v.0));
        let ph = |h: &HalfEdgeId| HalfEdgeId(format!("{prefix}{}", h.0));
        let cyclic = self
            .cyclic
            .iter()
            .map(|(v, o)| (pv(v), o.iter().map(ph).collect()))
            .collect();
        FatGraph { graph: g, cyclic }
    }

    /// Purely combinatorial view (drops the fat structure).
    pub fn forget(&self) -> Graph {
        self.graph.clone()
    }
}

// ---------------------------------------------------------------------------
// Elementary generators
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    Multi,
    Unit,
    Comulti,
    Counit,
    Id,
    Twist,
}

impl Generator {
    pub fn parse(name: &str) -> Result<Generator> {
        match name.to_ascii_lowercase().as_str() {
            "multi" | "mu" => Ok(Generator::Multi),
            "unit" | "eta" => Ok(Generator::Unit),
            "comulti" | "nu" => Ok(Generator::Comulti),
            "counit" | "eps" => Ok(Generator::Counit),
            "id" => Ok(Generator::Id),
            "twist" | "tau" => Ok(Generator::Twist),
            other => Err(GraphError::UnknownGenerator(other.to_string())),
        }
    }

    pub fn inputs(&self) -> usize {
        match self {
            Generator::Multi | Generator::Twist => 2,
            Generator::Unit => 0,
            Generator::Comulti | Generator::Counit | Generator::Id => 1,
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            Generator::Comulti | Generator::Twist => 2,
            Generator::Counit => 0,
            Generator::Multi | Generator::Unit | Generator::Id => 1,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Generator::Multi => "mu",
            Generator::Unit => "eta",
            Generator::Comulti => "nu",
            Generator::Counit => "eps",
            Generator::Id => "id",
            Generator::Twist => "tau",
        };
        write!(f, "{name}")
    }
}

/// The labelled generator graphs. Half-edges named `sh_i` are glued to the
/// internal vertex; the cyclic orders are the strip-embeddable ones.
pub fn elementary(gen: Generator) -> FatGraph {
    match gen {
        Generator::Multi => {
            let g = Graph::new(
                [v("v"), v("v0"), v("v1"), v("v2")],
                [
                    (h("h0"), v("v0"), h("sh0"), v("v")),
                    (h("h1"), v("v1"), h("sh1"), v("v")),
                    (h("h2"), v("v2"), h("sh2"), v("v")),
                ],
                vec![v("v1"), v("v2")],
                vec![v("v0")],
            )
            .unwrap();
            let mut cyclic = BTreeMap::new();
            cyclic.insert(v("v"), vec![h("sh0"), h("sh1"), h("sh2")]);
            cyclic.insert(v("v0"), vec![h("h0")]);
            cyclic.insert(v("v1"), vec![h("h1")]);
            cyclic.insert(v("v2"), vec![h("h2")]);
            FatGraph::new(g, cyclic).unwrap()
        }
        Generator::Comulti => {
            let g = Graph::new(
                [v("v"), v("v0"), v("v1"), v("v2")],
                [
                    (h("h0"), v("v0"), h("sh0"), v("v")),
                    (h("h1"), v("v1"), h("sh1"), v("v")),
                    (h("h2"), v("v2"), h("sh2"), v("v")),
                ],
                vec![v("v0")],
                vec![v("v1"), v("v2")],
            )
            .unwrap();
            let mut cyclic = BTreeMap::new();
            cyclic.insert(v("v"), vec![h("sh0"), h("sh2"), h("sh1")]);
            cyclic.insert(v("v0"), vec![h("h0")]);
            cyclic.insert(v("v1"), vec![h("h1")]);
            cyclic.insert(v("v2"), vec![h("h2")]);
            FatGraph::new(g, cyclic).unwrap()
        }
        Generator::Unit => {
            let g = Graph::new(
                [v("v"), v("v0")],
                [(h("h0"), v("v0"), h("sh0"), v("v"))],
                vec![],
                vec![v("v0")],
            )
            .unwrap();
            let mut cyclic = BTreeMap::new();
            cyclic.insert(v("v"), vec![h("sh0")]);
            cyclic.insert(v("v0"), vec![h("h0")]);
            FatGraph::new(g, cyclic).unwrap()
        }
        Generator::Counit => {
            let g = Graph::new(
                [v("v"), v("v0")],
                [(h("h0"), v("v0"), h("sh0"), v("v"))],
                vec![v("v0")],
                vec![],
            )
            .unwrap();
            let mut cyclic = BTreeMap::new();
            cyclic.insert(v("v"), vec![h("sh0")]);
            cyclic.insert(v("v0"), vec![h("h0")]);
            FatGraph::new(g, cyclic).unwrap()
        }
        Generator::Id => {
            let g = Graph::new([v("w")], [], vec![v("w")], vec![v("w")]).unwrap();
            FatGraph::new(g, BTreeMap::new()).unwrap()
        }
        Generator::Twist => {
            let g = Graph::new(
                [v("w1"), v("w2")],
                [],
                vec![v("w1"), v("w2")],
                vec![v("w2"), v("w1")],
            )
            .unwrap();
            FatGraph::new(g, BTreeMap::new()).unwrap()
        }
    }
}

// ---------------------------------------------------------------------------
// Isomorphisms
// ---------------------------------------------------------------------------

/// A pair of bijections on vertices and half-edges commuting with σ and s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Iso {
    pub vmap: BTreeMap<VertexId, VertexId>,
    pub hmap: BTreeMap<HalfEdgeId, HalfEdgeId>,
}

impl Iso {
    pub fn identity(g: &Graph) -> Iso {
        Iso {
            vmap: g.vertices.iter().map(|v| (v.clone(), v.clone())).collect(),
            hmap: g.sigma.keys().map(|h| (h.clone(), h.clone())).collect(),
        }
    }

    pub fn apply_v(&self, v: &VertexId) -> VertexId {
        self.vmap[v].clone()
    }
    pub fn apply_h(&self, h: &HalfEdgeId) -> HalfEdgeId {
        self.hmap[h].clone()
    }
    pub fn apply_e(&self, e: &EdgeId) -> EdgeId {
        EdgeId::new(self.apply_h(&e.0), self.apply_h(&e.1))
    }

    /// Check this is an isomorphism `g1 -> g2` respecting ordered leg lists.
    pub fn check(&self, g1: &Graph, g2: &Graph) -> bool {
        if g1.vertices.len() != g2.vertices.len() || g1.sigma.len() != g2.sigma.len() {
            return false;
        }
        if self.vmap.len() != g1.vertices.len() || self.hmap.len() != g1.sigma.len() {
            return false;
        }
        let vimage: BTreeSet<&VertexId> = self.vmap.values().collect();
        let himage: BTreeSet<&HalfEdgeId> = self.hmap.values().collect();
        if vimage.len() != g1.vertices.len() || himage.len() != g1.sigma.len() {
            return false;
        }
        if !g1
            .vertices
            .iter()
            .all(|v| g2.vertices.contains(&self.vmap[v]))
        {
            return false;
        }
        for (h1, h2) in &g1.sigma {
            if g2.sigma.get(&self.hmap[h1]) != Some(&self.hmap[h2]) {
                return false;
            }
            if g2.s.get(&self.hmap[h1]) != Some(&self.vmap[&g1.s[h1]]) {
                return false;
            }
        }
        let legs_ok = |l1: &[VertexId], l2: &[VertexId]| {
            l1.len() == l2.len() && l1.iter().zip(l2).all(|(a, b)| &self.vmap[a] == b)
        };
        legs_ok(&g1.legs_in, &g2.legs_in) && legs_ok(&g1.legs_out, &g2.legs_out)
    }

    /// Additionally commutes with the cyclic orders.
    pub fn check_fat(&self, f1: &FatGraph, f2: &FatGraph) -> bool {
        if !self.check(&f1.graph, &f2.graph) {
            return false;
        }
        for (v1, order) in &f1.cyclic {
            let mapped: Vec<HalfEdgeId> = order.iter().map(|h| self.apply_h(h)).collect();
            let target = &f2.cyclic[&self.vmap[v1]];
            if mapped.len() != target.len() {
                return false;
            }
            let n = mapped.len();
            let ok = (0..n).any(|rot| (0..n).all(|i| mapped[(rot + i) % n] == target[i]));
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Find an isomorphism `g1 -> g2` respecting ordered leg lists, by
/// backtracking over half-edge assignments. Intended for small graphs.
pub fn find_isomorphism(g1: &Graph, g2: &Graph) -> Option<Iso> {
    find_isomorphisms(g1, g2, None, true).into_iter().next()
}

pub fn find_fat_isomorphism(f1: &FatGraph, f2: &FatGraph) -> Option<Iso> {
    find_isomorphisms(&f1.graph, &f2.graph, Some((f1, f2)), true)
        .into_iter()
        .next()
}

/// All automorphisms of a graph respecting ordered leg lists.
pub fn automorphisms(g: &Graph) -> Vec<Iso> {
    find_isomorphisms(g, g, None, false)
}

fn find_isomorphisms(
    g1: &Graph,
    g2: &Graph,
    fat: Option<(&FatGraph, &FatGraph)>,
    first_only: bool,
) -> Vec<Iso> {
    let mut results = Vec::new();
    if g1.vertices.len() != g2.vertices.len() || g1.sigma.len() != g2.sigma.len() {
        return results;
    }
    if g1.legs_in.len() != g2.legs_in.len() || g1.legs_out.len() != g2.legs_out.len() {
        return results;
    }
    let mut vmap: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut vused: BTreeSet<VertexId> = BTreeSet::new();
    for (a, b) in g1
        .legs_in
        .iter()
        .zip(&g2.legs_in)
        .chain(g1.legs_out.iter().zip(&g2.legs_out))
    {
        if let Some(prev) = vmap.get(a) {
            if prev != b {
                return results;
            }
        } else {
            if vused.contains(b) {
                return results;
            }
            vmap.insert(a.clone(), b.clone());
            vused.insert(b.clone());
        }
    }
    let halves1: Vec<HalfEdgeId> = g1.sigma.keys().cloned().collect();
    let mut hmap: BTreeMap<HalfEdgeId, HalfEdgeId> = BTreeMap::new();
    let mut hused: BTreeSet<HalfEdgeId> = BTreeSet::new();
    backtrack(
        g1, g2, fat, &halves1, 0, &mut vmap, &mut vused, &mut hmap, &mut hused, &mut results,
        first_only,
    );
    results
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    g1: &Graph,
    g2: &Graph,
    fat: Option<(&FatGraph, &FatGraph)>,
    halves: &[HalfEdgeId],
    at: usize,
    vmap: &mut BTreeMap<VertexId, VertexId>,
    vused: &mut BTreeSet<VertexId>,
    hmap: &mut BTreeMap<HalfEdgeId, HalfEdgeId>,
    hused: &mut BTreeSet<HalfEdgeId>,
    results: &mut Vec<Iso>,
    first_only: bool,
) {
    if first_only && !results.is_empty() {
        return;
    }
    if at == halves.len() {
        let unmapped1: Vec<VertexId> = g1
            .vertices
            .iter()
            .filter(|v| !vmap.contains_key(v))
            .cloned()
            .collect();
        let free2: Vec<VertexId> = g2
            .vertices
            .iter()
            .filter(|v| !vused.contains(v))
            .cloned()
            .collect();
        if unmapped1.len() != free2.len() {
            return;
        }
        let mut full_v = vmap.clone();
        for (a, b) in unmapped1.iter().zip(&free2) {
            full_v.insert(a.clone(), b.clone());
        }
        let iso = Iso {
            vmap: full_v,
            hmap: hmap.clone(),
        };
        let ok = match fat {
            Some((f1, f2)) => iso.check_fat(f1, f2),
            None => iso.check(g1, g2),
        };
        if ok {
            results.push(iso);
        }
        return;
    }
    let h1 = &halves[at];
    if hmap.contains_key(h1) {
        backtrack(
            g1, g2, fat, halves, at + 1, vmap, vused, hmap, hused, results, first_only,
        );
        return;
    }
    let v1 = &g1.s[h1];
    let candidates: Vec<HalfEdgeId> = g2
        .sigma
        .keys()
        .filter(|h2| !hused.contains(*h2))
        .cloned()
        .collect();
    for h2 in candidates {
        let v2 = g2.s[&h2].clone();
        let vnew = match vmap.get(v1) {
            Some(prev) => {
                if prev != &v2 {
                    continue;
                }
                false
            }
            None => {
                if vused.contains(&v2) {
                    continue;
                }
                true
            }
        };
        let s1 = g1.sigma[h1].clone();
        let s2 = g2.sigma[&h2].clone();
        let partner_assigned = hmap.get(&s1).cloned();
        if let Some(p) = &partner_assigned {
            if p != &s2 {
                continue;
            }
        } else if hused.contains(&s2) || s2 == h2 {
            continue;
        }
        if vnew {
            vmap.insert(v1.clone(), v2.clone());
            vused.insert(v2.clone());
        }
        hmap.insert(h1.clone(), h2.clone());
        hused.insert(h2.clone());
        let partner_new = partner_assigned.is_none();
        let mut partner_vnew = false;
        let mut ok = true;
        if partner_new {
            hmap.insert(s1.clone(), s2.clone());
            hused.insert(s2.clone());
            let pv1 = &g1.s[&s1];
            let pv2 = g2.s[&s2].clone();
            match vmap.get(pv1) {
                Some(prev) => {
                    if prev != &pv2 {
                        ok = false;
                    }
                }
                None => {
                    if vused.contains(&pv2) {
                        ok = false;
                    } else {
                        vmap.insert(pv1.clone(), pv2.clone());
                        vused.insert(pv2.clone());
                        partner_vnew = true;
                    }
                }
            }
        }
        if ok {
            backtrack(
                g1, g2, fat, halves, at + 1, vmap, vused, hmap, hused, results, first_only,
            );
        }
        if partner_new {
            if partner_vnew {
                let pv1 = &g1.s[&s1];
                let pv2 = vmap.remove(pv1).unwrap();
                vused.remove(&pv2);
            }
            hmap.remove(&s1);
            hused.remove(&s2);
        }
        hmap.remove(h1);
        hused.remove(&h2);
        if vnew {
            vmap.remove(v1);
            vused.remove(&v2);
        }
        if first_only && !results.is_empty() {
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub half_edges: Vec<String>,
    pub sigma: Vec<(String, String)>,
    pub s: BTreeMap<String, String>,
    #[serde(rename = "in")]
    pub legs_in: Vec<String>,
    #[serde(rename = "out")]
    pub legs_out: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<BTreeMap<String, Vec<String>>>,
}

impl Graph {
    pub fn to_json(&self) -> GraphJson {
        let mut sigma = Vec::new();
        for e in self.edges() {
            sigma.push((e.0 .0.clone(), e.1 .0.clone()));
        }
        GraphJson {
            vertices: self.vertices.iter().map(|v| v.0.clone()).collect(),
            half_edges: self.sigma.keys().map(|h| h.0.clone()).collect(),
            sigma,
            s: self
                .s
                .iter()
                .map(|(h, v)| (h.0.clone(), v.0.clone()))
                .collect(),
            legs_in: self.legs_in.iter().map(|v| v.0.clone()).collect(),
            legs_out: self.legs_out.iter().map(|v| v.0.clone()).collect(),
            cyclic: None,
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Graph> {
        let vertices: BTreeSet<VertexId> = j.vertices.iter().map(|s| v(s)).collect();
        let mut sigma = BTreeMap::new();
        let mut s = BTreeMap::new();
        for (a, b) in &j.sigma {
            let (ha, hb) = (h(a), h(b));
            sigma.insert(ha.clone(), hb.clone());
            sigma.insert(hb, ha);
        }
        for (hh, vv) in &j.s {
            s.insert(h(hh), v(vv));
        }
        let g = Graph {
            vertices,
            sigma,
            s,
            legs_in: j.legs_in.iter().map(|s| v(s)).collect(),
            legs_out: j.legs_out.iter().map(|s| v(s)).collect(),
        };
        let report = g.validate();
        if !report.is_valid() {
            return Err(GraphError::Invalid(report.violations.join("; ")));
        }
        Ok(g)
    }
}

impl FatGraph {
    pub fn to_json(&self) -> GraphJson {
        let mut j = self.graph.to_json();
        j.cyclic = Some(
            self.cyclic
                .iter()
                .map(|(v, o)| (v.0.clone(), o.iter().map(|h| h.0.clone()).collect()))
                .collect(),
        );
        j
    }

    pub fn from_json(j: &GraphJson) -> Result<FatGraph> {
        let g = Graph::from_json(j)?;
        let cyclic = match &j.cyclic {
            Some(c) => c
                .iter()
                .map(|(vv, o)| (v(vv), o.iter().map(|hh| h(hh)).collect()))
                .collect(),
            None => {
                return Err(GraphError::Invalid(
                    "fat graph JSON requires a `cyclic` field".into(),
                ))
            }
        };
        FatGraph::new(g, cyclic)
    }
}

/// Parse either a fat graph (when `cyclic` is present) or a plain graph.
pub enum AnyGraph {
    Plain(Graph),
    Fat(FatGraph),
}

impl AnyGraph {
    pub fn from_json(j: &GraphJson) -> Result<AnyGraph> {
        if j.cyclic.is_some() {
            Ok(AnyGraph::Fat(FatGraph::from_json(j)?))
        } else {
            Ok(AnyGraph::Plain(Graph::from_json(j)?))
        }
    }

    pub fn graph(&self) -> &Graph {
        match self {
            AnyGraph::Plain(g) => g,
            AnyGraph::Fat(f) => f.graph(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_is_valid_and_forest() {
        let m = elementary(Generator::Multi);
        assert!(m.validate().is_valid());
        assert!(m.graph().is_forest());
        assert!(!m.graph().has_tadpole());
        assert_eq!(m.graph().euler_char_rel(Side::In), -1);
        assert_eq!(m.graph().euler_char_rel(Side::Out), 0);
    }

    #[test]
    fn id_graph_euler() {
        let g = elementary(Generator::Id);
        assert_eq!(g.graph().euler_char_rel(Side::In), 0);
        assert_eq!(g.graph().euler_char_rel(Side::Out), 0);
    }

    #[test]
    fn sigma_fixed_point_invalid() {
        // hand-build a broken graph: h paired with itself
        let mut sigma = BTreeMap::new();
        sigma.insert(h("a"), h("a"));
        let mut s = BTreeMap::new();
        s.insert(h("a"), v("x"));
        let g = Graph {
            vertices: [v("x")].into_iter().collect(),
            sigma,
            s,
            legs_in: vec![],
            legs_out: vec![],
        };
        let report = g.validate();
        assert!(report
            .violations
            .iter()
            .any(|m| m.contains("involution has fixed point")));
    }

    #[test]
    fn leg_arity_two_invalid() {
        let g = Graph {
            vertices: [v("x"), v("y"), v("z")].into_iter().collect(),
            sigma: [
                (h("a"), h("b")),
                (h("b"), h("a")),
                (h("c"), h("d")),
                (h("d"), h("c")),
            ]
            .into_iter()
            .collect(),
            s: [
                (h("a"), v("x")),
                (h("b"), v("y")),
                (h("c"), v("x")),
                (h("d"), v("z")),
            ]
            .into_iter()
            .collect(),
            legs_in: vec![v("x")],
            legs_out: vec![],
        };
        assert!(!g.validate().is_valid());
    }

    fn tadpole_graph() -> Graph {
        // one internal vertex with a loop, one incoming leg
        Graph::new(
            [v("u"), v("c")],
            [
                (h("a"), v("u"), h("sa"), v("c")),
                (h("t"), v("c"), h("st"), v("c")),
            ],
            vec![v("u")],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn tadpole_not_forest_and_uncollapsible() {
        let g = tadpole_graph();
        assert!(g.has_tadpole());
        assert!(!g.is_forest());
        let e = EdgeId::new(h("t"), h("st"));
        assert_eq!(g.collapse_edge(&e, &v("c")), Err(GraphError::TadpoleCollapse));
    }

    #[test]
    fn theta_graph_not_forest_no_tadpole() {
        let g = Graph::new(
            [v("a"), v("b")],
            [
                (h("p"), v("a"), h("sp"), v("b")),
                (h("q"), v("a"), h("sq"), v("b")),
            ],
            vec![],
            vec![],
        )
        .unwrap();
        assert!(!g.is_forest());
        assert!(!g.has_tadpole());
        // cycle rank 1
        assert_eq!(g.edge_count() as i64 - g.vertices().len() as i64 + 1, 1);
    }

    #[test]
    fn collapse_preserves_euler_and_forest() {
        let m = elementary(Generator::Unit).graph().prefixed("u.");
        let mm = elementary(Generator::Multi).graph().prefixed("m.");
        // unit ⊗ id glued into multi
        let idg = elementary(Generator::Id).graph().prefixed("i.");
        let inner = m.disjoint_union(&idg).unwrap();
        let c = inner.glue(&mm).unwrap();
        assert_eq!(c.edge_count(), 4);
        let chi_in = c.euler_char_rel(Side::In);
        let chi_out = c.euler_char_rel(Side::Out);
        let e = EdgeId::new(h("u.h0"), h("u.sh0"));
        // delete the internal end: survivor is the merged out-leg of unit
        let c2 = c.collapse_edge(&e, &v("u.v0")).unwrap();
        assert_eq!(c2.euler_char_rel(Side::In), chi_in);
        assert_eq!(c2.euler_char_rel(Side::Out), chi_out);
        assert_eq!(c2.vertices().len(), c.vertices().len() - 1);
        assert_eq!(c.is_forest(), c2.is_forest());
    }

    #[test]
    fn glue_with_identity_is_isomorphic() {
        let m = elementary(Generator::Multi).graph().clone();
        let ids = {
            let i1 = elementary(Generator::Id).graph().prefixed("a.");
            let i2 = elementary(Generator::Id).graph().prefixed("b.");
            i1.disjoint_union(&i2).unwrap()
        };
        let c = ids.glue(&m).unwrap();
        assert!(find_isomorphism(&c, &m).is_some());
    }

    #[test]
    fn glue_arity_mismatch() {
        let m = elementary(Generator::Multi).graph().clone();
        let u = elementary(Generator::Unit).graph().prefixed("u.");
        assert!(matches!(
            u.glue(&m),
            Err(GraphError::ArityMismatch(_))
        ));
    }

    #[test]
    fn disjoint_union_counts() {
        let a = elementary(Generator::Multi).graph().prefixed("a.");
        let b = elementary(Generator::Comulti).graph().prefixed("b.");
        let u = a.disjoint_union(&b).unwrap();
        assert_eq!(u.legs_in().len(), 3);
        assert_eq!(u.legs_out().len(), 3);
        assert_eq!(u.components().len(), 2);
    }

    #[test]
    fn multi_planar_and_crossed_not() {
        let m = elementary(Generator::Multi);
        assert_eq!(m.genus(), 0);
        assert_eq!(m.boundary_cycles().len(), 1);
        assert!(m.is_planar_ordered(None, None));
        // crossed inputs: swap the cyclic order at the centre
        let mut cyclic = m.cyclic().clone();
        cyclic.insert(v("v"), vec![h("sh0"), h("sh2"), h("sh1")]);
        let crossed = FatGraph::new(m.graph().clone(), cyclic).unwrap();
        assert_eq!(crossed.genus(), 0);
        assert!(!crossed.is_planar_ordered(None, None));
        // comulti's canonical structure is planar too
        assert!(elementary(Generator::Comulti).is_planar_ordered(None, None));
    }

    #[test]
    fn tadpole_genus_one() {
        // a tadpole with cyclic order (t, st) at the vertex: torus-like piece
        let g = tadpole_graph();
        let mut cyclic = BTreeMap::new();
        cyclic.insert(v("c"), vec![h("sa"), h("t"), h("st")]);
        cyclic.insert(v("u"), vec![h("a")]);
        let f = FatGraph::new(g, cyclic).unwrap();
        // walk by hand: faces of this ribbon structure
        let b = f.boundary_cycles().len();
        let genus = f.genus();
        // χ_surface = V - E = 2 - 2 = 0, so 2 - 2g - b = 0
        assert_eq!(2 - 2 * genus - b as i64, 0);
        assert!(!f.is_planar_ordered(None, None) || genus == 0);
    }

    #[test]
    fn union_adds_genus() {
        let m = elementary(Generator::Multi).prefixed("a.");
        let n = elementary(Generator::Comulti).prefixed("b.");
        let u = m.disjoint_union(&n).unwrap();
        assert_eq!(u.genus(), m.genus() + n.genus());
    }

    #[test]
    fn fat_collapse_merges_cyclic_orders() {
        // glue unit into multi's first input: collapse the unit edge
        let u = elementary(Generator::Unit).prefixed("u.");
        let i = elementary(Generator::Id).prefixed("i.");
        let m = elementary(Generator::Multi).prefixed("m.");
        let inner = u.disjoint_union(&i).unwrap();
        let c = inner.glue(&m).unwrap();
        let e = EdgeId::new(h("u.h0"), h("u.sh0"));
        let c2 = c.collapse_edge(&e, &v("u.v0")).unwrap();
        assert!(c2.validate().is_valid());
        // the merged vertex carries the unit centre's ends plus multi's h1
        let order = &c2.cyclic()[&v("u.v0")];
        assert_eq!(order.len(), 1);
    }

    #[test]
    fn multi_input_swap_automorphism_exists_without_leg_order() {
        // with ordered legs, multi has no nontrivial automorphism
        let m = elementary(Generator::Multi).graph().clone();
        assert_eq!(automorphisms(&m).len(), 1);
        // the tadpole flip is an automorphism fixing legs
        let t = tadpole_graph();
        let autos = automorphisms(&t);
        assert_eq!(autos.len(), 2);
    }

    #[test]
    fn twist_generator_crossed_legs() {
        let t = elementary(Generator::Twist);
        assert_eq!(t.graph().legs_in().len(), 2);
        assert_eq!(t.graph().legs_out()[0], t.graph().legs_in()[1]);
        assert!(!t.is_planar_ordered(None, None));
    }

    #[test]
    fn json_roundtrip() {
        let m = elementary(Generator::Multi);
        let j = serde_json::to_string(&m.to_json()).unwrap();
        let back: GraphJson = serde_json::from_str(&j).unwrap();
        let f2 = FatGraph::from_json(&back).unwrap();
        assert_eq!(&f2, &m);
        let g = tadpole_graph();
        let j = serde_json::to_string(&g.to_json()).unwrap();
        let back: GraphJson = serde_json::from_str(&j).unwrap();
        assert_eq!(Graph::from_json(&back).unwrap(), g);
    }

    #[test]
    fn glue_multi_counit_gives_symgraph() {
        let m = elementary(Generator::Multi).graph().prefixed("m.");
        let c = elementary(Generator::Counit).graph().prefixed("c.");
        let sg = m.glue(&c).unwrap();
        assert_eq!(sg.legs_in().len(), 2);
        assert_eq!(sg.legs_out().len(), 0);
        assert_eq!(sg.edge_count(), 4);
        assert!(sg.is_forest());
    }
}
