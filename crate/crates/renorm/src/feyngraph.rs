//! Feynman graphs with external legs.
//!
//! Internal edges join two internal vertices, external edges join an internal
//! vertex to an external vertex of valence one. Looping edges are excluded.
//!
//! A subgraph `γ` is a set of internal edges. It is admissible when it is
//! proper, every connected component is 1PI, and collapsing each component to
//! a vertex creates no looping edge and respects the theory predicate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use xfeyn_core::amplitude::AmplitudeInput;

use crate::error::{RenormError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: u32,
    pub external: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: u32,
    pub tgt: u32,
    pub internal: bool,
}

impl Edge {
    fn touches(&self, v: u32) -> bool {
        self.src == v || self.tgt == v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeynmanGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Theory profile: bound on vertex valence, `None` for no bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_valence: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    #[error("vertex id {id} appears more than once")]
    DuplicateVertex { id: u32 },
    #[error("edge {edge} refers to missing vertex {vertex}")]
    MissingEndpoint { edge: usize, vertex: u32 },
    #[error("edge {edge} is a looping edge at vertex {vertex}")]
    LoopingEdge { edge: usize, vertex: u32 },
    #[error("external vertex {vertex} has valence {valence}")]
    ExternalValence { vertex: u32, valence: usize },
    #[error("edge {edge} has an internal flag that does not match its endpoints")]
    EdgeKind { edge: usize },
    #[error("vertex {vertex} has valence {valence}, above the bound {max}")]
    ValenceBound { vertex: u32, valence: usize, max: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NotOnePi {
    #[error("no internal edges")]
    NoInternalEdges,
    #[error("internal structure is disconnected")]
    Disconnected,
    #[error("internal edge {0} is a bridge")]
    Bridge(usize),
}

/// One connected piece of a subgraph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubgraphComponent {
    pub edges: BTreeSet<usize>,
    pub vertices: BTreeSet<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphSelection {
    /// Indices into the parent's edge list.
    pub edges: BTreeSet<usize>,
    pub vertices: BTreeSet<u32>,
    pub components: Vec<SubgraphComponent>,
}

impl SubgraphSelection {
    /// Groups internal edges of `graph` into connected components.
    pub fn from_edges(graph: &FeynmanGraph, edges: impl IntoIterator<Item = usize>) -> Result<Self> {
        let edges: BTreeSet<usize> = edges.into_iter().collect();
        for &e in &edges {
            match graph.edges.get(e) {
                Some(edge) if edge.internal => {}
                _ => return Err(RenormError::Inadmissible(format!("{e} is not an internal edge index"))),
            }
        }
        let vertices: BTreeSet<u32> = edges.iter().flat_map(|&e| [graph.edges[e].src, graph.edges[e].tgt]).collect();
        let mut dsu = Dsu::new(vertices.iter().copied());
        for &e in &edges {
            dsu.union(graph.edges[e].src, graph.edges[e].tgt);
        }
        let mut groups: BTreeMap<u32, SubgraphComponent> = BTreeMap::new();
        for &e in &edges {
            let root = dsu.find(graph.edges[e].src);
            let c = groups.entry(root).or_insert_with(|| SubgraphComponent { edges: BTreeSet::new(), vertices: BTreeSet::new() });
            c.edges.insert(e);
            c.vertices.insert(graph.edges[e].src);
            c.vertices.insert(graph.edges[e].tgt);
        }
        let mut components: Vec<SubgraphComponent> = groups.into_values().collect();
        components.sort_by_key(|c| *c.edges.iter().next().expect("nonempty component"));
        Ok(SubgraphSelection { edges, vertices, components })
    }

    pub fn degree(&self) -> usize {
        self.edges.len()
    }
}

struct Dsu {
    parent: BTreeMap<u32, u32>,
}

impl Dsu {
    fn new(ids: impl Iterator<Item = u32>) -> Self {
        Dsu { parent: ids.map(|v| (v, v)).collect() }
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[&v] != v {
            let up = self.parent[&self.parent[&v]];
            self.parent.insert(v, up);
            v = up;
        }
        v
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent.insert(ra.max(rb), ra.min(rb));
        }
    }

    fn classes(&mut self) -> usize {
        let ids: Vec<u32> = self.parent.keys().copied().collect();
        ids.into_iter().map(|v| self.find(v)).collect::<BTreeSet<_>>().len()
    }
}

impl FeynmanGraph {
    /// Internal vertices `0..n`, the given internal edges, and `legs[v]`
    /// external legs at vertex `v`.
    pub fn from_parts(n: u32, internal: &[(u32, u32)], legs: &[usize]) -> Self {
        let mut vertices: Vec<Vertex> = (0..n).map(|id| Vertex { id, external: false }).collect();
        let mut edges: Vec<Edge> = internal.iter().map(|&(src, tgt)| Edge { src, tgt, internal: true }).collect();
        let mut next = n;
        for (v, &k) in legs.iter().enumerate() {
            for _ in 0..k {
                vertices.push(Vertex { id: next, external: true });
                edges.push(Edge { src: next, tgt: v as u32, internal: false });
                next += 1;
            }
        }
        FeynmanGraph { vertices, edges, max_valence: None }
    }

    pub fn with_max_valence(mut self, max: Option<usize>) -> Self {
        self.max_valence = max;
        self
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut kinds = BTreeMap::new();
        for v in &self.vertices {
            if kinds.insert(v.id, v.external).is_some() {
                out.push(Violation::DuplicateVertex { id: v.id });
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let mut present = true;
            for end in [e.src, e.tgt] {
                if !kinds.contains_key(&end) {
                    out.push(Violation::MissingEndpoint { edge: i, vertex: end });
                    present = false;
                }
            }
            if e.src == e.tgt {
                out.push(Violation::LoopingEdge { edge: i, vertex: e.src });
            } else if present {
                let (a, b) = (kinds[&e.src], kinds[&e.tgt]);
                let fine = if e.internal { !a && !b } else { a != b };
                if !fine {
                    out.push(Violation::EdgeKind { edge: i });
                }
            }
        }
        for v in &self.vertices {
            let valence = self.valence(v.id);
            if v.external && valence != 1 {
                out.push(Violation::ExternalValence { vertex: v.id, valence });
            }
            if let Some(max) = self.max_valence {
                if !v.external && valence > max {
                    out.push(Violation::ValenceBound { vertex: v.id, valence, max });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn checked(&self) -> Result<()> {
        self.validate().map_err(RenormError::InvalidGraph)
    }

    pub fn valence(&self, id: u32) -> usize {
        self.edges.iter().map(|e| usize::from(e.src == id) + usize::from(e.tgt == id)).sum()
    }

    /// Number of external legs at vertex `id`.
    pub fn legs(&self, id: u32) -> usize {
        self.edges.iter().filter(|e| !e.internal && e.touches(id)).count()
    }

    pub fn internal_vertices(&self) -> BTreeSet<u32> {
        self.vertices.iter().filter(|v| !v.external).map(|v| v.id).collect()
    }

    pub fn internal_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].internal).collect()
    }

    /// Number of internal lines.
    pub fn degree(&self) -> usize {
        self.edges.iter().filter(|e| e.internal).count()
    }

    /// First Betti number of the internal structure.
    pub fn loop_number(&self) -> usize {
        let vs = self.internal_vertices();
        let mut dsu = Dsu::new(vs.iter().copied());
        for e in self.edges.iter().filter(|e| e.internal) {
            dsu.union(e.src, e.tgt);
        }
        self.degree() + dsu.classes() - vs.len()
    }

    fn connected(&self, vertices: &BTreeSet<u32>, edges: &BTreeSet<usize>, skip: Option<usize>) -> bool {
        let mut dsu = Dsu::new(vertices.iter().copied());
        for &e in edges.iter().filter(|&&e| Some(e) != skip) {
            dsu.union(self.edges[e].src, self.edges[e].tgt);
        }
        dsu.classes() <= 1
    }

    fn bridgeless(&self, vertices: &BTreeSet<u32>, edges: &BTreeSet<usize>) -> std::result::Result<(), NotOnePi> {
        if edges.is_empty() {
            return Err(NotOnePi::NoInternalEdges);
        }
        if !self.connected(vertices, edges, None) {
            return Err(NotOnePi::Disconnected);
        }
        match edges.iter().find(|&&e| !self.connected(vertices, edges, Some(e))) {
            Some(&e) => Err(NotOnePi::Bridge(e)),
            None => Ok(()),
        }
    }

    /// Whether the internal-edge graph is connected and has no bridge.
    pub fn one_pi_check(&self) -> std::result::Result<(), NotOnePi> {
        self.bridgeless(&self.internal_vertices(), &self.internal_edges().into_iter().collect())
    }

    pub fn is_1pi(&self) -> bool {
        self.one_pi_check().is_ok()
    }

    /// Every internal vertex within the valence bound.
    pub fn respects_valence(&self) -> bool {
        match self.max_valence {
            None => true,
            Some(max) => self.internal_vertices().iter().all(|&v| self.valence(v) <= max),
        }
    }

    fn collapse(&self, sel: &SubgraphSelection) -> FeynmanGraph {
        let mut rep: BTreeMap<u32, u32> = BTreeMap::new();
        for c in &sel.components {
            let r = *c.vertices.iter().next().expect("nonempty component");
            for &v in &c.vertices {
                rep.insert(v, r);
            }
        }
        let map = |v: u32| rep.get(&v).copied().unwrap_or(v);
        let vertices = self.vertices.iter().filter(|v| map(v.id) == v.id).copied().collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !sel.edges.contains(i))
            .map(|(_, e)| Edge { src: map(e.src), tgt: map(e.tgt), internal: e.internal })
            .collect();
        FeynmanGraph { vertices, edges, max_valence: self.max_valence }
    }

    fn admissibility(&self, sel: &SubgraphSelection, accept: &dyn Fn(&FeynmanGraph) -> bool) -> std::result::Result<FeynmanGraph, String> {
        if sel.edges.is_empty() {
            return Err("empty subgraph".into());
        }
        if sel.edges.len() >= self.degree() {
            return Err("the whole graph is not a proper subgraph".into());
        }
        for c in &sel.components {
            self.bridgeless(&c.vertices, &c.edges)
                .map_err(|why| format!("component with edges {:?} is not 1PI: {why}", c.edges))?;
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.internal && !sel.edges.contains(&i) {
                if let Some(c) = sel.components.iter().find(|c| c.vertices.contains(&e.src) && c.vertices.contains(&e.tgt)) {
                    return Err(format!("contracting edges {:?} turns edge {i} into a looping edge", c.edges));
                }
            }
        }
        let quotient = self.collapse(sel);
        if !accept(&quotient) {
            return Err("the quotient is rejected by the theory profile".into());
        }
        Ok(quotient)
    }

    /// Admissible subgraphs under the valence bound of the graph.
    pub fn admissible_subgraphs(&self) -> Vec<SubgraphSelection> {
        self.admissible_subgraphs_with(&|g: &FeynmanGraph| g.respects_valence())
    }

    /// Admissible subgraphs with a custom "same theory" predicate on quotients.
    pub fn admissible_subgraphs_with(&self, accept: &dyn Fn(&FeynmanGraph) -> bool) -> Vec<SubgraphSelection> {
        let internal = self.internal_edges();
        assert!(internal.len() < 32, "subgraph enumeration is exhaustive; {} internal edges is too many", internal.len());
        let mut out = Vec::new();
        for mask in 1u64..(1u64 << internal.len()) - 1 {
            let chosen = internal.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e);
            let sel = SubgraphSelection::from_edges(self, chosen).expect("internal edges");
            if sel.components.iter().any(|c| c.edges.len() < 2) {
                continue;
            }
            if self.admissibility(&sel, accept).is_ok() {
                out.push(sel);
            }
        }
        out
    }

    /// `Γ/γ`: each component of `γ` collapsed to its smallest vertex id.
    pub fn contract(&self, gamma: &SubgraphSelection) -> Result<FeynmanGraph> {
        self.checked()?;
        let quotient = self
            .admissibility(gamma, &|g: &FeynmanGraph| g.respects_valence())
            .map_err(RenormError::Inadmissible)?;
        quotient.checked()?;
        Ok(quotient)
    }

    /// A component of `γ` as a graph of its own; every other edge at one of
    /// its vertices becomes an external leg.
    pub fn component_graph(&self, comp: &SubgraphComponent) -> FeynmanGraph {
        let mut next = self.vertices.iter().map(|v| v.id).max().map_or(0, |m| m + 1);
        let mut vertices: Vec<Vertex> = comp.vertices.iter().map(|&id| Vertex { id, external: false }).collect();
        let mut edges: Vec<Edge> = comp.edges.iter().map(|&e| self.edges[e]).collect();
        for (i, e) in self.edges.iter().enumerate() {
            if comp.edges.contains(&i) {
                continue;
            }
            for end in [e.src, e.tgt] {
                if comp.vertices.contains(&end) {
                    vertices.push(Vertex { id: next, external: true });
                    edges.push(Edge { src: next, tgt: end, internal: false });
                    next += 1;
                }
            }
        }
        FeynmanGraph { vertices, edges, max_valence: self.max_valence }
    }

    /// Canonical labelling of the isomorphism class (internal vertices
    /// renumbered, external vertices kept only as leg counts).
    pub fn canonical(&self) -> CanonicalGraph {
        let ids: Vec<u32> = self.internal_vertices().into_iter().collect();
        let index: BTreeMap<u32, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = ids.len();
        let legs: Vec<u32> = ids.iter().map(|&v| self.legs(v) as u32).collect();
        let mut adj = vec![vec![0u32; n]; n];
        for e in self.edges.iter().filter(|e| e.internal) {
            let (a, b) = (index[&e.src], index[&e.tgt]);
            adj[a][b] += 1;
            adj[b][a] += 1;
        }
        CanonicalGraph::from_adjacency(&legs, &adj)
    }

    /// Per-edge data for amplitude evaluation: internal vertex `v` sits at
    /// `positions[v]`, internal edge number `i` (in edge order) has mass `masses[i]`.
    pub fn amplitude_input(&self, dim: u32, positions: &BTreeMap<u32, Vec<f64>>, masses: &[f64]) -> Result<AmplitudeInput> {
        self.checked()?;
        let ids: Vec<u32> = self.internal_vertices().into_iter().collect();
        let internal = self.internal_edges();
        if masses.len() != internal.len() {
            return Err(RenormError::InvalidInput(format!("{} internal edges but {} masses", internal.len(), masses.len())));
        }
        let mut pos = Vec::with_capacity(ids.len());
        for v in &ids {
            pos.push(positions.get(v).cloned().ok_or_else(|| RenormError::InvalidInput(format!("no position for vertex {v}")))?);
        }
        let slot = |v: u32| ids.binary_search(&v).expect("internal vertex");
        let edges = internal.iter().map(|&e| (slot(self.edges[e].src), slot(self.edges[e].tgt))).collect();
        Ok(AmplitudeInput { dim, edges, positions: pos, masses: masses.to_vec() })
    }
}

/// Isomorphism-class representative: internal vertices `0..n` with leg counts,
/// and the sorted list of internal edges `(a, b)`, `a < b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalGraph {
    legs: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl CanonicalGraph {
    fn from_adjacency(legs: &[u32], adj: &[Vec<u32>]) -> Self {
        let n = legs.len();
        let encode = |order: &[usize]| {
            let mut pos = vec![0u32; n];
            for (p, &v) in order.iter().enumerate() {
                pos[v] = p as u32;
            }
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    let (x, y) = (pos[a].min(pos[b]), pos[a].max(pos[b]));
                    edges.extend(std::iter::repeat_n((x, y), adj[a][b] as usize));
                }
            }
            edges.sort_unstable();
            CanonicalGraph { legs: order.iter().map(|&v| legs[v]).collect(), edges }
        };
        if n == 0 {
            return encode(&[]);
        }
        let color = refine(legs, adj);
        let classes: Vec<Vec<usize>> = (0..=*color.iter().max().expect("n > 0"))
            .map(|c| (0..n).filter(|&v| color[v] == c).collect())
            .collect();
        classes
            .iter()
            .map(|class| class.iter().copied().permutations(class.len()))
            .multi_cartesian_product()
            .map(|choice| encode(&choice.concat()))
            .min_by(|a, b| (&a.legs, &a.edges).cmp(&(&b.legs, &b.edges)))
            .expect("at least one ordering")
    }

    pub fn degree(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.legs.len()
    }

    pub fn legs(&self) -> &[u32] {
        &self.legs
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn to_graph(&self) -> FeynmanGraph {
        let legs: Vec<usize> = self.legs.iter().map(|&k| k as usize).collect();
        FeynmanGraph::from_parts(self.legs.len() as u32, &self.edges, &legs)
    }
}

/// Colour refinement; colours are ranks of isomorphism-invariant signatures.
fn refine(legs: &[u32], adj: &[Vec<u32>]) -> Vec<usize> {
    let n = legs.len();
    let mut color = rank(&(0..n).map(|v| (legs[v], adj[v].iter().sum::<u32>())).collect::<Vec<_>>());
    loop {
        let sig: Vec<(usize, Vec<(usize, u32)>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<(usize, u32)> = (0..n).filter(|&w| adj[v][w] > 0).map(|w| (color[w], adj[v][w])).collect();
                nb.sort_unstable();
                (color[v], nb)
            })
            .collect();
        let next = rank(&sig);
        let count = |c: &[usize]| c.iter().collect::<BTreeSet<_>>().len();
        if count(&next) == count(&color) {
            return next;
        }
        color = next;
    }
}

fn rank<T: Ord>(keys: &[T]) -> Vec<usize> {
    let distinct: Vec<&T> = keys.iter().sorted().dedup().collect();
    keys.iter().map(|k| distinct.binary_search(&k).expect("present")).collect()
}

/// Degree first, so sorted collections of graphs are graded.
impl Ord for CanonicalGraph {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.edges.len(), self.legs.len(), &self.legs, &self.edges).cmp(&(
            other.edges.len(),
            other.legs.len(),
            &other.legs,
            &other.edges,
        ))
    }
}

impl PartialOrd for CanonicalGraph {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CanonicalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges = self.edges.iter().map(|(a, b)| format!("{a}-{b}")).join(",");
        let legs = self.legs.iter().join(",");
        write!(f, "[{edges};legs={legs}]")
    }
}

impl Serialize for CanonicalGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_graph().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CanonicalGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let g = FeynmanGraph::deserialize(d)?;
        g.validate().map_err(|v| serde::de::Error::custom(RenormError::InvalidGraph(v)))?;
        Ok(g.canonical())
    }
}

/// 1PI graphs with `2..=max_vertices` internal vertices, `2..=max_edges`
/// internal edges and at most `max_legs` legs per vertex, up to isomorphism.
pub fn one_pi_family(max_vertices: u32, max_edges: usize, max_legs: usize) -> Vec<CanonicalGraph> {
    let mut out = BTreeSet::new();
    for n in 2..=max_vertices {
        let pairs: Vec<(u32, u32)> = (0..n).tuple_combinations().collect();
        for e in 2..=max_edges {
            for edges in pairs.iter().copied().combinations_with_replacement(e) {
                let bare = FeynmanGraph::from_parts(n, &edges, &[]);
                if !bare.is_1pi() {
                    continue;
                }
                for legs in (0..n).map(|_| 0..=max_legs).multi_cartesian_product() {
                    out.insert(FeynmanGraph::from_parts(n, &edges, &legs).canonical());
                }
            }
        }
    }
    out.into_iter().collect()
}
