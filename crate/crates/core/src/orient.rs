//! The determinant-line sign engine.
//!
//! An orientation of a graph relative to one of its boundaries is stored as
//! a wedge word in the normal form `det(E)^{-1} ⊗ Or(H) ⊗ det(V∖L)`: an
//! ordered edge block (inverted), an ordered half-edge block and an ordered
//! vertex block, together with a sign. Reordering within a block picks up
//! the permutation parity; edge collapses delete the three head letters
//! after normalising; gluing concatenates blocks with the Koszul sign
//! `(-1)^{(m+n)k}`.
//!
//! Letter degrees for cross-word shuffles: edge letters +1, half-edge
//! letters 0, vertex letters -1, so a whole word is a homogeneous letter of
//! degree `|E| - |V∖L|` (negated when the word is inverted).

use crate::graph::{
    automorphisms, EdgeId, Generator, Graph, GraphError, HalfEdgeId, Iso, Side, VertexId,
};
use crate::grmod::{koszul_permutation_sign, neg_one_pow, Matrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrientError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed orientation word: {0}")]
    Malformed(String),
    #[error("not a blockwise permutation: {0}")]
    NotBlockwisePermutation(String),
    #[error("words live on different graphs or sides")]
    GraphMismatch,
    #[error("collapsed endpoint lies on the word's own boundary side")]
    SideViolation,
    #[error("inversion flags differ")]
    InversionMismatch,
    #[error("c/d parameters do not match: ({0},{1}) vs ({2},{3})")]
    ParameterMismatch(i64, i64, i64, i64),
    #[error("graph pair is not acyclic relative to the boundary; no canonical trivialisation")]
    NotAcyclic,
}

pub type Result<T> = std::result::Result<T, OrientError>;

/// A generator of `det(G, ∂_side)` as an ordered wedge word with a sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationWord {
    pub graph: Arc<Graph>,
    pub side: Side,
    pub edges: Vec<EdgeId>,
    pub half_edges: Vec<HalfEdgeId>,
    pub vertices: Vec<VertexId>,
    pub sign: i64,
    /// Generator of the inverse line instead.
    pub inverted: bool,
}

impl fmt::Display for OrientationWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.edges.iter().map(|e| e.to_string()).collect();
        let h: Vec<String> = self.half_edges.iter().map(|h| h.to_string()).collect();
        let v: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        let s = if self.sign < 0 { "-" } else { "" };
        let inv = if self.inverted { " (inverted)" } else { "" };
        write!(
            f,
            "{s}({})^-1 ⊗ {} ⊗ {}{inv}",
            e.join("∧"),
            h.join("∧"),
            v.join("∧")
        )
    }
}

fn permutation_parity<T: Eq + Clone + fmt::Debug>(from: &[T], to: &[T]) -> Result<i64> {
    if from.len() != to.len() {
        return Err(OrientError::NotBlockwisePermutation(format!(
            "lengths {} vs {}",
            from.len(),
            to.len()
        )));
    }
    let mut perm = Vec::with_capacity(from.len());
    let mut used = vec![false; to.len()];
    for x in from {
        let mut found = None;
        for (j, y) in to.iter().enumerate() {
            if !used[j] && y == x {
                found = Some(j);
                break;
            }
        }
        let Some(j) = found else {
            return Err(OrientError::NotBlockwisePermutation(format!(
                "letter {x:?} missing from target"
            )));
        };
        used[j] = true;
        perm.push(j);
    }
    let mut sign = 1i64;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                sign = -sign;
            }
        }
    }
    Ok(sign)
}

impl OrientationWord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        graph: Arc<Graph>,
        side: Side,
        edges: Vec<EdgeId>,
        half_edges: Vec<HalfEdgeId>,
        vertices: Vec<VertexId>,
        sign: i64,
        inverted: bool,
    ) -> Result<OrientationWord> {
        let w = OrientationWord {
            graph,
            side,
            edges,
            half_edges,
            vertices,
            sign,
            inverted,
        };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<()> {
        if self.sign != 1 && self.sign != -1 {
            return Err(OrientError::Malformed(format!("sign {}", self.sign)));
        }
        let want_edges = self.graph.edges();
        if self.edges.len() != want_edges.len()
            || !want_edges.iter().all(|e| self.edges.contains(e))
        {
            return Err(OrientError::Malformed(
                "edge block must enumerate E exactly once".into(),
            ));
        }
        let want_halves: Vec<HalfEdgeId> = self.graph.half_edges().cloned().collect();
        if self.half_edges.len() != want_halves.len()
            || !want_halves.iter().all(|h| self.half_edges.contains(h))
        {
            return Err(OrientError::Malformed(
                "half-edge block must enumerate H exactly once".into(),
            ));
        }
        let want_vertices = self.graph.vertices_off_side(self.side);
        if self.vertices.len() != want_vertices.len()
            || !want_vertices.iter().all(|v| self.vertices.contains(v))
        {
            return Err(OrientError::Malformed(format!(
                "vertex block must enumerate V∖L_{:?} exactly once",
                self.side
            )));
        }
        Ok(())
    }

    /// `|E| - |V∖L_side|`, negated for inverted words.
    pub fn degree(&self) -> i64 {
        let raw = self.edges.len() as i64 - self.vertices.len() as i64;
        if self.inverted {
            -raw
        } else {
            raw
        }
    }

    /// Scalar `r` with `self = r · target`; blocks must match as sets.
    pub fn reorder_sign(&self, target: &OrientationWord) -> Result<i64> {
        if self.side != target.side || self.graph.as_ref() != target.graph.as_ref() {
            return Err(OrientError::GraphMismatch);
        }
        if self.inverted != target.inverted {
            return Err(OrientError::InversionMismatch);
        }
        let pe = permutation_parity(&self.edges, &target.edges)?;
        let ph = permutation_parity(&self.half_edges, &target.half_edges)?;
        let pv = permutation_parity(&self.vertices, &target.vertices)?;
        Ok(self.sign * target.sign * pe * ph * pv)
    }

    /// Push along the edge collapse `graph/e` with the given surviving
    /// vertex name: normalise so that `e` heads the edge block, its
    /// half-edge pair heads the half block with the half at the leaving
    /// vertex second, and the leaving vertex heads the vertex block; then
    /// delete the heads.
    pub fn collapse_action(&self, e: &EdgeId, survivor: &VertexId) -> Result<OrientationWord> {
        let new_graph = self.graph.collapse_edge(e, survivor)?;
        let a = self
            .graph
            .incidence(&e.0)
            .ok_or_else(|| OrientError::Malformed(format!("edge {e} not in graph")))?
            .clone();
        let b = self.graph.incidence(&e.1).unwrap().clone();
        let legs = self.graph.legs(self.side);
        let a_off = !legs.contains(&a);
        let b_off = !legs.contains(&b);
        let deleted = if survivor == &a { &b } else { &a };
        let leaving = match (a_off, b_off) {
            (true, true) => deleted.clone(),
            (true, false) => a.clone(),
            (false, true) => b.clone(),
            (false, false) => return Err(OrientError::SideViolation),
        };
        // half of e at the leaving vertex goes second in the pair
        let (h_keep, h_leave) = if self.graph.incidence(&e.0) == Some(&leaving) {
            (e.1.clone(), e.0.clone())
        } else {
            (e.0.clone(), e.1.clone())
        };
        let mut target_edges = vec![e.clone()];
        target_edges.extend(self.edges.iter().filter(|x| *x != e).cloned());
        let mut target_halves = vec![h_keep.clone(), h_leave.clone()];
        target_halves.extend(self.half_edges.iter().filter(|h| !e.contains(h)).cloned());
        let mut target_vertices = vec![leaving.clone()];
        target_vertices.extend(self.vertices.iter().filter(|v| **v != leaving).cloned());
        let target = OrientationWord {
            graph: self.graph.clone(),
            side: self.side,
            edges: target_edges,
            half_edges: target_halves,
            vertices: target_vertices,
            sign: 1,
            inverted: self.inverted,
        };
        let r = self.reorder_sign(&target)?;
        OrientationWord::new(
            Arc::new(new_graph),
            self.side,
            target.edges[1..].to_vec(),
            target.half_edges[2..].to_vec(),
            target.vertices[1..].to_vec(),
            r,
            self.inverted,
        )
    }

    /// Rename letters along an isomorphism onto `target_graph`; the sign is
    /// carried unchanged (transport of the same line element).
    pub fn transport(&self, iso: &Iso, target_graph: Arc<Graph>) -> Result<OrientationWord> {
        OrientationWord::new(
            target_graph,
            self.side,
            self.edges.iter().map(|e| iso.apply_e(e)).collect(),
            self.half_edges.iter().map(|h| iso.apply_h(h)).collect(),
            self.vertices.iter().map(|v| iso.apply_v(v)).collect(),
            self.sign,
            self.inverted,
        )
    }

    /// Action of a graph automorphism: `φ_*(w) = r · w`.
    pub fn automorphism_action(&self, iso: &Iso) -> Result<i64> {
        let moved = self.transport(iso, self.graph.clone())?;
        moved.reorder_sign(self)
    }

    pub fn prefixed(&self, prefix: &str) -> OrientationWord {
        let g = Arc::new(self.graph.prefixed(prefix));
        let pv = |v: &VertexId| VertexId(format!("{prefix}{}", v.0));
        let ph = |h: &HalfEdgeId| HalfEdgeId(format!("{prefix}{}", h.0));
        OrientationWord {
            graph: g,
            side: self.side,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeId::new(ph(&e.0), ph(&e.1)))
                .collect(),
            half_edges: self.half_edges.iter().map(ph).collect(),
            vertices: self.vertices.iter().map(pv).collect(),
            sign: self.sign,
            inverted: self.inverted,
        }
    }

    pub fn inverse(&self) -> OrientationWord {
        let mut w = self.clone();
        w.inverted = !w.inverted;
        w
    }
}

/// Deterministic generator of `det(G, ∂_side)`: edges sorted, half-edge
/// pairs with the leg-side half first where the edge touches exactly one
/// leg, vertices sorted, sign +1.
pub fn canonical_word(graph: &Arc<Graph>, side: Side) -> OrientationWord {
    let edges = graph.edges();
    let mut half_edges = Vec::new();
    for e in &edges {
        let (h1, h2) = canonical_pair(graph, e);
        half_edges.push(h1);
        half_edges.push(h2);
    }
    let mut vertices = graph.vertices_off_side(side);
    vertices.sort();
    OrientationWord {
        graph: graph.clone(),
        side,
        edges,
        half_edges,
        vertices,
        sign: 1,
        inverted: false,
    }
}

/// Pair order within an edge: when exactly one endpoint is a leg, the leg
/// end goes first (so the internal end is second); otherwise id order.
fn canonical_pair(graph: &Graph, e: &EdgeId) -> (HalfEdgeId, HalfEdgeId) {
    let a = graph.incidence(&e.0).unwrap();
    let b = graph.incidence(&e.1).unwrap();
    let a_leg = graph.is_leg(a);
    let b_leg = graph.is_leg(b);
    if b_leg && !a_leg {
        (e.1.clone(), e.0.clone())
    } else {
        (e.0.clone(), e.1.clone())
    }
}

/// The canonical generator 1 when `H_*(|G|, |L_side|) = 0`: the canonical
/// word signed by the determinant of the relative incidence matrix.
pub fn canonical_one_word(graph: &Arc<Graph>, side: Side) -> Result<OrientationWord> {
    let mut w = canonical_word(graph, side);
    if w.vertices.len() != w.edges.len() {
        return Err(OrientError::NotAcyclic);
    }
    let n = w.vertices.len();
    let vindex: BTreeMap<&VertexId, usize> =
        w.vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut m = Matrix::zero(n, n);
    for col in 0..n {
        // column = [s(second)] - [s(first)] in Z^V/Z^L for the pair order used
        let first = &w.half_edges[2 * col];
        let second = &w.half_edges[2 * col + 1];
        let vs = graph.incidence(second).unwrap();
        let vf = graph.incidence(first).unwrap();
        if let Some(&i) = vindex.get(vs) {
            *m.entry_mut(i, col) += crate::grmod::rat(1);
        }
        if let Some(&i) = vindex.get(vf) {
            *m.entry_mut(i, col) += crate::grmod::rat(-1);
        }
    }
    let det = m.det().map_err(|_| OrientError::NotAcyclic)?;
    w.sign = if det == crate::grmod::rat(1) {
        1
    } else if det == crate::grmod::rat(-1) {
        -1
    } else {
        return Err(OrientError::NotAcyclic);
    };
    Ok(w)
}

/// Composition of side words along `glue(inner.graph, outer.graph)`:
/// concatenated blocks, outer letters first, with the sign
/// `(-1)^{(m+n)k}` (`m = |E(G')|`, `n = |V(G')∖L|`, `k = |E(G)|`); for
/// inverted pairs the dual pairing contributes a further `(-1)^{|w'||w|}`.
pub fn compose_words(outer: &OrientationWord, inner: &OrientationWord) -> Result<OrientationWord> {
    if outer.side != inner.side {
        return Err(OrientError::GraphMismatch);
    }
    if outer.inverted != inner.inverted {
        return Err(OrientError::InversionMismatch);
    }
    let glued = Arc::new(inner.graph.glue(&outer.graph)?);
    let rename: BTreeMap<VertexId, VertexId> = outer
        .graph
        .legs_in()
        .iter()
        .cloned()
        .zip(inner.graph.legs_out().iter().cloned())
        .collect();
    let m = outer.edges.len() as i64;
    let n = outer.vertices.len() as i64;
    let k = inner.edges.len() as i64;
    let l = inner.vertices.len() as i64;
    let mut exponent = (m + n) * k;
    if outer.inverted {
        exponent += (m + n) * (k + l);
    }
    let mut edges = outer.edges.clone();
    edges.extend(inner.edges.iter().cloned());
    let mut half_edges = outer.half_edges.clone();
    half_edges.extend(inner.half_edges.iter().cloned());
    let mut vertices: Vec<VertexId> = outer
        .vertices
        .iter()
        .map(|v| rename.get(v).cloned().unwrap_or_else(|| v.clone()))
        .collect();
    vertices.extend(inner.vertices.iter().cloned());
    OrientationWord::new(
        glued,
        outer.side,
        edges,
        half_edges,
        vertices,
        outer.sign * inner.sign * neg_one_pow(exponent),
        outer.inverted,
    )
}

/// Side word of a disjoint union: left letters first, Koszul sign
/// `(-1)^{k2(k1+l1)}`; for inverted pairs a further `(-1)^{|w1||w2|}`.
pub fn union_words(left: &OrientationWord, right: &OrientationWord) -> Result<OrientationWord> {
    if left.side != right.side {
        return Err(OrientError::GraphMismatch);
    }
    if left.inverted != right.inverted {
        return Err(OrientError::InversionMismatch);
    }
    let union = Arc::new(left.graph.disjoint_union(&right.graph)?);
    let k1 = left.edges.len() as i64;
    let l1 = left.vertices.len() as i64;
    let k2 = right.edges.len() as i64;
    let l2 = right.vertices.len() as i64;
    let mut exponent = k2 * (k1 + l1);
    if left.inverted {
        exponent += (k1 + l1) * (k2 + l2);
    }
    let mut edges = left.edges.clone();
    edges.extend(right.edges.iter().cloned());
    let mut half_edges = left.half_edges.clone();
    half_edges.extend(right.half_edges.iter().cloned());
    let mut vertices = left.vertices.clone();
    vertices.extend(right.vertices.iter().cloned());
    OrientationWord::new(
        union,
        left.side,
        edges,
        half_edges,
        vertices,
        left.sign * right.sign * neg_one_pow(exponent),
        left.inverted,
    )
}

// ---------------------------------------------------------------------------
// (c,d)-orientations
// ---------------------------------------------------------------------------

/// A generator of `det_{c,d}(G) = det(G,∂_in)^{⊗c} ⊗ det(G,∂_out)^{⊗d}`:
/// `|c|` in-words and `|d|` out-words (inverted for negative powers) and an
/// integer coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdOrientation {
    pub graph: Arc<Graph>,
    pub c: i64,
    pub d: i64,
    pub in_words: Vec<OrientationWord>,
    pub out_words: Vec<OrientationWord>,
    pub coefficient: i64,
}

impl CdOrientation {
    pub fn new(
        graph: Arc<Graph>,
        c: i64,
        d: i64,
        in_word: OrientationWord,
        out_word: OrientationWord,
        coefficient: i64,
    ) -> Result<CdOrientation> {
        let mk = |w: &OrientationWord, power: i64| -> Vec<OrientationWord> {
            let mut ww = w.clone();
            ww.inverted = power < 0;
            vec![ww; power.unsigned_abs() as usize]
        };
        let o = CdOrientation {
            graph,
            c,
            d,
            in_words: mk(&in_word, c),
            out_words: mk(&out_word, d),
            coefficient,
        };
        o.check()?;
        Ok(o)
    }

    pub fn check(&self) -> Result<()> {
        if self.in_words.len() != self.c.unsigned_abs() as usize
            || self.out_words.len() != self.d.unsigned_abs() as usize
        {
            return Err(OrientError::Malformed(
                "word multiplicities do not match |c|,|d|".into(),
            ));
        }
        for w in &self.in_words {
            if w.side != Side::In || w.graph.as_ref() != self.graph.as_ref() {
                return Err(OrientError::GraphMismatch);
            }
            if w.inverted != (self.c < 0) {
                return Err(OrientError::InversionMismatch);
            }
            w.check()?;
        }
        for w in &self.out_words {
            if w.side != Side::Out || w.graph.as_ref() != self.graph.as_ref() {
                return Err(OrientError::GraphMismatch);
            }
            if w.inverted != (self.d < 0) {
                return Err(OrientError::InversionMismatch);
            }
            w.check()?;
        }
        Ok(())
    }

    /// Total degree `c·deg_in + d·deg_out`.
    pub fn degree(&self) -> i64 {
        let din: i64 = self.in_words.iter().map(|w| w.degree()).sum();
        let dout: i64 = self.out_words.iter().map(|w| w.degree()).sum();
        din + dout
    }

    /// Scalar `r` with `self = r · other` (same graph, same parameters).
    pub fn compare(&self, other: &CdOrientation) -> Result<i64> {
        if self.c != other.c || self.d != other.d {
            return Err(OrientError::ParameterMismatch(
                self.c, self.d, other.c, other.d,
            ));
        }
        if self.graph.as_ref() != other.graph.as_ref() {
            return Err(OrientError::GraphMismatch);
        }
        if other.coefficient == 0 || self.coefficient % other.coefficient != 0 {
            return Err(OrientError::Malformed(
                "coefficients are not comparable".into(),
            ));
        }
        let mut r = self.coefficient / other.coefficient;
        for (a, b) in self.in_words.iter().zip(&other.in_words) {
            r *= a.reorder_sign(b)?;
        }
        for (a, b) in self.out_words.iter().zip(&other.out_words) {
            r *= a.reorder_sign(b)?;
        }
        Ok(r)
    }

    pub fn collapse_action(&self, e: &EdgeId, survivor: &VertexId) -> Result<CdOrientation> {
        let new_graph = Arc::new(self.graph.collapse_edge(e, survivor)?);
        let push = |ws: &[OrientationWord]| -> Result<Vec<OrientationWord>> {
            ws.iter()
                .map(|w| {
                    let mut out = w.collapse_action(e, survivor)?;
                    out.graph = new_graph.clone();
                    Ok(out)
                })
                .collect()
        };
        Ok(CdOrientation {
            graph: new_graph.clone(),
            c: self.c,
            d: self.d,
            in_words: push(&self.in_words)?,
            out_words: push(&self.out_words)?,
            coefficient: self.coefficient,
        })
    }

    pub fn transport(&self, iso: &Iso, target: Arc<Graph>) -> Result<CdOrientation> {
        Ok(CdOrientation {
            graph: target.clone(),
            c: self.c,
            d: self.d,
            in_words: self
                .in_words
                .iter()
                .map(|w| w.transport(iso, target.clone()))
                .collect::<Result<_>>()?,
            out_words: self
                .out_words
                .iter()
                .map(|w| w.transport(iso, target.clone()))
                .collect::<Result<_>>()?,
            coefficient: self.coefficient,
        })
    }

    /// Action of a graph automorphism on the whole (c,d)-orientation.
    pub fn automorphism_action(&self, iso: &Iso) -> Result<i64> {
        let mut r = 1i64;
        for w in &self.in_words {
            r *= w.automorphism_action(iso)?;
        }
        for w in &self.out_words {
            r *= w.automorphism_action(iso)?;
        }
        Ok(r)
    }

    pub fn prefixed(&self, prefix: &str) -> CdOrientation {
        let g = Arc::new(self.graph.prefixed(prefix));
        let fix = |ws: &[OrientationWord]| {
            ws.iter()
                .map(|w| {
                    let mut w2 = w.prefixed(prefix);
                    w2.graph = g.clone();
                    w2
                })
                .collect()
        };
        CdOrientation {
            graph: g.clone(),
            c: self.c,
            d: self.d,
            in_words: fix(&self.in_words),
            out_words: fix(&self.out_words),
            coefficient: self.coefficient,
        }
    }
}

/// Koszul shuffle sign for interleaving the words of two (c,d)-orientations
/// `(in'^c out'^d in^c out^d) -> (in'_1 in_1 … in'_c in_c out'_1 out_1 …)`.
fn riffle_sign(outer: &CdOrientation, inner: &CdOrientation) -> i64 {
    let c = outer.in_words.len();
    let mut degs = Vec::new();
    let mut perm = Vec::new();
    for (i, w) in outer.in_words.iter().enumerate() {
        degs.push(w.degree());
        perm.push(2 * i);
    }
    for (j, w) in outer.out_words.iter().enumerate() {
        degs.push(w.degree());
        perm.push(2 * c + 2 * j);
    }
    for (i, w) in inner.in_words.iter().enumerate() {
        degs.push(w.degree());
        perm.push(2 * i + 1);
    }
    for (j, w) in inner.out_words.iter().enumerate() {
        degs.push(w.degree());
        perm.push(2 * c + 2 * j + 1);
    }
    koszul_permutation_sign(&degs, &perm)
}

/// Composition `comp: det_{c,d}(G') ⊗ det_{c,d}(G) -> det_{c,d}(G'∘G)`.
pub fn cd_compose(outer: &CdOrientation, inner: &CdOrientation) -> Result<CdOrientation> {
    if outer.c != inner.c || outer.d != inner.d {
        return Err(OrientError::ParameterMismatch(
            outer.c, outer.d, inner.c, inner.d,
        ));
    }
    let glued = Arc::new(inner.graph.glue(&outer.graph)?);
    let shuffle = riffle_sign(outer, inner);
    let mut in_words = Vec::new();
    for (a, b) in outer.in_words.iter().zip(&inner.in_words) {
        let mut w = compose_words(a, b)?;
        w.graph = glued.clone();
        in_words.push(w);
    }
    let mut out_words = Vec::new();
    for (a, b) in outer.out_words.iter().zip(&inner.out_words) {
        let mut w = compose_words(a, b)?;
        w.graph = glued.clone();
        out_words.push(w);
    }
    Ok(CdOrientation {
        graph: glued,
        c: outer.c,
        d: outer.d,
        in_words,
        out_words,
        coefficient: outer.coefficient * inner.coefficient * shuffle,
    })
}

/// Monoidal product `det_{c,d}(G_1) ⊗ det_{c,d}(G_2) -> det_{c,d}(G_1 ⊔ G_2)`.
pub fn cd_tensor(left: &CdOrientation, right: &CdOrientation) -> Result<CdOrientation> {
    if left.c != right.c || left.d != right.d {
        return Err(OrientError::ParameterMismatch(
            left.c, left.d, right.c, right.d,
        ));
    }
    let union = Arc::new(left.graph.disjoint_union(&right.graph)?);
    let shuffle = riffle_sign(left, right);
    let mut in_words = Vec::new();
    for (a, b) in left.in_words.iter().zip(&right.in_words) {
        let mut w = union_words(a, b)?;
        w.graph = union.clone();
        in_words.push(w);
    }
    let mut out_words = Vec::new();
    for (a, b) in left.out_words.iter().zip(&right.out_words) {
        let mut w = union_words(a, b)?;
        w.graph = union.clone();
        out_words.push(w);
    }
    Ok(CdOrientation {
        graph: union,
        c: left.c,
        d: left.d,
        in_words,
        out_words,
        coefficient: left.coefficient * right.coefficient * shuffle,
    })
}

/// The proof's chosen generator orientations for the elementary graphs,
/// raised to the powers `c` and `d`.
pub fn generator_orientation(gen: Generator, c: i64, d: i64) -> Result<CdOrientation> {
    let graph = Arc::new(crate::graph::elementary(gen).graph().clone());
    let star_word = |side: Side| -> OrientationWord {
        // (e_2 ∧ e_1 ∧ e_0)^{-1} ⊗ h_0∧σh_0∧…∧σh_2 ⊗ v∧v_0
        let e =
            |i: usize| EdgeId::new(HalfEdgeId(format!("h{i}")), HalfEdgeId(format!("sh{i}")));
        OrientationWord {
            graph: graph.clone(),
            side,
            edges: vec![e(2), e(1), e(0)],
            half_edges: ["h0", "sh0", "h1", "sh1", "h2", "sh2"]
                .iter()
                .map(|s| HalfEdgeId(s.to_string()))
                .collect(),
            vertices: vec![VertexId("v".into()), VertexId("v0".into())],
            sign: 1,
            inverted: false,
        }
    };
    let stick_word = |side: Side| -> OrientationWord {
        // e_0^{-1} ⊗ h_0∧σh_0 ⊗ v∧v_0
        OrientationWord {
            graph: graph.clone(),
            side,
            edges: vec![EdgeId::new(HalfEdgeId("h0".into()), HalfEdgeId("sh0".into()))],
            half_edges: vec![HalfEdgeId("h0".into()), HalfEdgeId("sh0".into())],
            vertices: vec![VertexId("v".into()), VertexId("v0".into())],
            sign: 1,
            inverted: false,
        }
    };
    let empty_word = |side: Side| OrientationWord {
        graph: graph.clone(),
        side,
        edges: vec![],
        half_edges: vec![],
        vertices: vec![],
        sign: 1,
        inverted: false,
    };
    let (w_in, w_out) = match gen {
        Generator::Multi => (star_word(Side::In), canonical_one_word(&graph, Side::Out)?),
        Generator::Comulti => (canonical_one_word(&graph, Side::In)?, star_word(Side::Out)),
        Generator::Unit => (stick_word(Side::In), canonical_one_word(&graph, Side::Out)?),
        Generator::Counit => (canonical_one_word(&graph, Side::In)?, stick_word(Side::Out)),
        Generator::Id | Generator::Twist => (empty_word(Side::In), empty_word(Side::Out)),
    };
    CdOrientation::new(graph, c, d, w_in, w_out, 1)
}

// ---------------------------------------------------------------------------
// Orbit classification
// ---------------------------------------------------------------------------

/// What the `π_1`-orbit summand of `det_{c,d}(G)` looks like.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitClass {
    /// Forest: free of rank one (sign of the canonical generator).
    FreeGenerator(i64),
    /// Non-forest with `c+d` odd: the tadpole flip acts by -1.
    TwoTorsion(TorsionWitness),
    /// The criterion is silent.
    Unknown,
}

/// Collapse to a tadpole plus the flip automorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsionWitness {
    pub collapses: Vec<(EdgeId, VertexId)>,
    pub tadpole: EdgeId,
}

pub fn orbit_class(graph: &Graph, c: i64, d: i64) -> OrbitClass {
    if graph.is_forest() {
        return OrbitClass::FreeGenerator(1);
    }
    if (c + d).rem_euclid(2) == 0 {
        return OrbitClass::Unknown;
    }
    // collapse internal-internal non-tadpole edges until a tadpole appears
    let mut g = graph.clone();
    let mut collapses = Vec::new();
    loop {
        if let Some(t) = g.edges().into_iter().find(|e| g.is_tadpole(e)) {
            return OrbitClass::TwoTorsion(TorsionWitness {
                collapses,
                tadpole: t,
            });
        }
        let next = g.edges().into_iter().find(|e| {
            let a = g.incidence(&e.0).unwrap();
            let b = g.incidence(&e.1).unwrap();
            !g.is_tadpole(e) && !g.is_leg(a) && !g.is_leg(b)
        });
        match next {
            Some(e) => {
                let a = g.incidence(&e.0).unwrap().clone();
                let b = g.incidence(&e.1).unwrap().clone();
                let survivor = if a <= b { a } else { b };
                g = g.collapse_edge(&e, &survivor).expect("legal collapse");
                collapses.push((e, survivor));
            }
            None => return OrbitClass::Unknown,
        }
    }
}

/// The flip of a tadpole edge `h ↔ σh` as an automorphism.
pub fn tadpole_flip(graph: &Graph, tadpole: &EdgeId) -> Iso {
    let mut iso = Iso::identity(graph);
    iso.hmap.insert(tadpole.0.clone(), tadpole.1.clone());
    iso.hmap.insert(tadpole.1.clone(), tadpole.0.clone());
    iso
}

/// Signs of all leg-respecting automorphisms on the canonical side word.
pub fn automorphism_sign_table(graph: &Arc<Graph>, side: Side) -> Vec<(Iso, i64)> {
    let w = canonical_word(graph, side);
    automorphisms(graph)
        .into_iter()
        .map(|iso| {
            let r = w.automorphism_action(&iso).expect("action defined");
            (iso, r)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct OrientationWordJson {
    pub side: String,
    pub edges: Vec<(String, String)>,
    pub half_edges: Vec<String>,
    pub vertices: Vec<String>,
    pub sign: i64,
    #[serde(default)]
    pub inverted: bool,
}

#[derive(Serialize, Deserialize)]
pub struct CdOrientationJson {
    pub c: i64,
    pub d: i64,
    pub coefficient: i64,
    pub in_words: Vec<OrientationWordJson>,
    pub out_words: Vec<OrientationWordJson>,
}

impl OrientationWord {
    pub fn to_json(&self) -> OrientationWordJson {
        OrientationWordJson {
            side: match self.side {
                Side::In => "in".into(),
                Side::Out => "out".into(),
            },
            edges: self
                .edges
                .iter()
                .map(|e| (e.0 .0.clone(), e.1 .0.clone()))
                .collect(),
            half_edges: self.half_edges.iter().map(|h| h.0.clone()).collect(),
            vertices: self.vertices.iter().map(|v| v.0.clone()).collect(),
            sign: self.sign,
            inverted: self.inverted,
        }
    }

    pub fn from_json(j: &OrientationWordJson, graph: Arc<Graph>) -> Result<OrientationWord> {
        let side = match j.side.as_str() {
            "in" => Side::In,
            "out" => Side::Out,
            other => return Err(OrientError::Malformed(format!("unknown side `{other}`"))),
        };
        OrientationWord::new(
            graph,
            side,
            j.edges
                .iter()
                .map(|(a, b)| EdgeId::new(HalfEdgeId(a.clone()), HalfEdgeId(b.clone())))
                .collect(),
            j.half_edges.iter().map(|h| HalfEdgeId(h.clone())).collect(),
            j.vertices.iter().map(|v| VertexId(v.clone())).collect(),
            j.sign,
            j.inverted,
        )
    }
}

impl CdOrientation {
    pub fn to_json(&self) -> CdOrientationJson {
        CdOrientationJson {
            c: self.c,
            d: self.d,
            coefficient: self.coefficient,
            in_words: self.in_words.iter().map(|w| w.to_json()).collect(),
            out_words: self.out_words.iter().map(|w| w.to_json()).collect(),
        }
    }

    pub fn from_json(j: &CdOrientationJson, graph: Arc<Graph>) -> Result<CdOrientation> {
        let o = CdOrientation {
            graph: graph.clone(),
            c: j.c,
            d: j.d,
            in_words: j
                .in_words
                .iter()
                .map(|w| OrientationWord::from_json(w, graph.clone()))
                .collect::<Result<_>>()?,
            out_words: j
                .out_words
                .iter()
                .map(|w| OrientationWord::from_json(w, graph.clone()))
                .collect::<Result<_>>()?,
            coefficient: j.coefficient,
        };
        o.check()?;
        Ok(o)
    }
}
