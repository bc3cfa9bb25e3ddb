//! Finite directed multigraphs and the graph-theoretic predicates the
//! decision engine is built on: hereditary saturated closures, cycle/exit
//! detection, balloon conditions, and induced subgraphs.
//!
//! Vertices and edges keep their declaration order; every operation that
//! returns sets or lists orders them by that declaration order, so all
//! downstream certificates are deterministic.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Index of a vertex in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub(crate) u32);

/// Index of an edge in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub(crate) u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct EdgeRecord {
    name: String,
    source: VertexId,
    range: VertexId,
}

/// A name can refer to a vertex or an edge; names are unique across both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameRef {
    Vertex(VertexId),
    Edge(EdgeId),
}

/// A finite directed multigraph with stable declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_names: Vec<String>,
    edges: Vec<EdgeRecord>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    names: HashMap<String, NameRef>,
}

/// Errors from [`Graph::parse`]; every variant carries the 1-based line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: duplicate name \"{name}\"")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}: undeclared vertex \"{name}\"")]
    UndeclaredVertex { line: usize, name: String },
    #[error("line {line}: invalid name \"{name}\" (expected [A-Za-z0-9_]+)")]
    InvalidName { line: usize, name: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

fn valid_name(token: &str) -> bool {
    !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Graph {
    /// Parses the line-oriented graph format:
    ///
    /// ```text
    /// # comment
    /// vertex NAME
    /// edge NAME SRC DST
    /// ```
    ///
    /// Tokens are whitespace separated, names match `[A-Za-z0-9_]+`, and
    /// every vertex must be declared before an edge uses it.
    pub fn parse(text: &str) -> Result<Graph, ParseError> {
        let mut vertex_names: Vec<String> = Vec::new();
        let mut edges: Vec<EdgeRecord> = Vec::new();
        let mut names: HashMap<String, NameRef> = HashMap::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let mut tokens = content.split_whitespace();
            let Some(keyword) = tokens.next() else {
                continue;
            };
            match keyword {
                "vertex" => {
                    let Some(name) = tokens.next() else {
                        return Err(ParseError::Malformed {
                            line,
                            reason: "vertex declaration needs a name".into(),
                        });
                    };
                    if tokens.next().is_some() {
                        return Err(ParseError::Malformed {
                            line,
                            reason: "vertex declaration takes exactly one name".into(),
                        });
                    }
                    if !valid_name(name) {
                        return Err(ParseError::InvalidName {
                            line,
                            name: name.into(),
                        });
                    }
                    if names.contains_key(name) {
                        return Err(ParseError::DuplicateName {
                            line,
                            name: name.into(),
                        });
                    }
                    let id = VertexId(vertex_names.len() as u32);
                    names.insert(name.to_owned(), NameRef::Vertex(id));
                    vertex_names.push(name.to_owned());
                }
                "edge" => {
                    let (Some(name), Some(src), Some(dst)) =
                        (tokens.next(), tokens.next(), tokens.next())
                    else {
                        return Err(ParseError::Malformed {
                            line,
                            reason: "edge declaration needs a name, source and range".into(),
                        });
                    };
                    if tokens.next().is_some() {
                        return Err(ParseError::Malformed {
                            line,
                            reason: "edge declaration takes exactly three names".into(),
                        });
                    }
                    if !valid_name(name) {
                        return Err(ParseError::InvalidName {
                            line,
                            name: name.into(),
                        });
                    }
                    if names.contains_key(name) {
                        return Err(ParseError::DuplicateName {
                            line,
                            name: name.into(),
                        });
                    }
                    let resolve = |token: &str| match names.get(token) {
                        Some(NameRef::Vertex(v)) => Ok(*v),
                        _ => Err(ParseError::UndeclaredVertex {
                            line,
                            name: token.into(),
                        }),
                    };
                    let source = resolve(src)?;
                    let range = resolve(dst)?;
                    let id = EdgeId(edges.len() as u32);
                    names.insert(name.to_owned(), NameRef::Edge(id));
                    edges.push(EdgeRecord {
                        name: name.to_owned(),
                        source,
                        range,
                    });
                }
                other => {
                    return Err(ParseError::Malformed {
                        line,
                        reason: format!("unknown declaration \"{other}\""),
                    });
                }
            }
        }

        Ok(Graph::assemble(vertex_names, edges, names))
    }

    fn assemble(
        vertex_names: Vec<String>,
        edges: Vec<EdgeRecord>,
        names: HashMap<String, NameRef>,
    ) -> Graph {
        let mut out_edges = vec![Vec::new(); vertex_names.len()];
        let mut in_edges = vec![Vec::new(); vertex_names.len()];
        for (i, edge) in edges.iter().enumerate() {
            out_edges[edge.source.index()].push(EdgeId(i as u32));
            in_edges[edge.range.index()].push(EdgeId(i as u32));
        }
        Graph {
            vertex_names,
            edges,
            out_edges,
            in_edges,
            names,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_names.len() as u32).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.index()]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.index()].name
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].source
    }

    pub fn range(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].range
    }

    pub fn is_loop(&self, e: EdgeId) -> bool {
        self.source(e) == self.range(e)
    }

    /// Out-edges of `v` in declaration order.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v.index()]
    }

    /// In-edges of `v` in declaration order.
    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[v.index()]
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.out_edges[v.index()].is_empty()
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        match self.names.get(name) {
            Some(NameRef::Vertex(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        match self.names.get(name) {
            Some(NameRef::Edge(e)) => Some(*e),
            _ => None,
        }
    }

    pub fn lookup(&self, name: &str) -> Option<NameRef> {
        self.names.get(name).copied()
    }

    /// The full vertex set.
    pub fn full_vertex_set(&self) -> VertexSet {
        self.vertices().collect()
    }
}

/// A subset of a graph's vertices, ordered by declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct VertexSet(BTreeSet<VertexId>);

impl VertexSet {
    pub fn new() -> VertexSet {
        VertexSet(BTreeSet::new())
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        self.0.insert(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.0.iter().copied()
    }

    pub fn first(&self) -> Option<VertexId> {
        self.0.first().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Member names in declaration order.
    pub fn names<'g>(&self, g: &'g Graph) -> Vec<&'g str> {
        self.iter().map(|v| g.vertex_name(v)).collect()
    }

    pub fn render(&self, g: &Graph) -> String {
        let mut s = String::from("{");
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(g.vertex_name(v));
        }
        s.push('}');
        s
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<T: IntoIterator<Item = VertexId>>(iter: T) -> VertexSet {
        VertexSet(iter.into_iter().collect())
    }
}

/// Partition of the vertices into weakly connected components, each sorted
/// by declaration order; the list is sorted by least member.
pub fn weak_components(g: &Graph) -> Vec<VertexSet> {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for e in g.edges() {
        let a = find(&mut parent, g.source(e).index());
        let b = find(&mut parent, g.range(e).index());
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }

    let mut groups: HashMap<usize, VertexSet> = HashMap::new();
    for v in 0..n {
        let root = find(&mut parent, v);
        groups.entry(root).or_default().insert(VertexId(v as u32));
    }
    let mut components: Vec<VertexSet> = groups.into_values().collect();
    components.sort();
    components
}

/// True iff every edge with source in `s` has its range in `s`.
pub fn is_hereditary(g: &Graph, s: &VertexSet) -> bool {
    g.edges()
        .all(|e| !s.contains(g.source(e)) || s.contains(g.range(e)))
}

/// True iff every non-sink vertex whose out-edge ranges all lie in `s` is
/// itself in `s`.
pub fn is_saturated(g: &Graph, s: &VertexSet) -> bool {
    g.vertices().all(|v| {
        g.is_sink(v)
            || s.contains(v)
            || g.out_edges(v).iter().any(|&e| !s.contains(g.range(e)))
    })
}

/// Least superset of `s` closed under taking edge ranges (hereditary) and
/// under adding non-sink vertices all of whose out-edge ranges are already
/// included (saturated).
pub fn hereditary_saturated_closure(g: &Graph, s: &VertexSet) -> VertexSet {
    let mut result = s.clone();
    for v in s.iter() {
        assert!(v.index() < g.vertex_count(), "vertex outside graph");
    }
    let mut changed = true;
    while changed {
        changed = false;
        for e in g.edges() {
            if result.contains(g.source(e)) && result.insert(g.range(e)) {
                changed = true;
            }
        }
        for v in g.vertices() {
            if !result.contains(v)
                && !g.is_sink(v)
                && g.out_edges(v).iter().all(|&e| result.contains(g.range(e)))
                && result.insert(v)
            {
                changed = true;
            }
        }
    }
    result
}

/// The inclusion-minimal sets among the closures of singletons, deduplicated
/// and sorted by least member. Every nonempty hereditary saturated subset
/// contains at least one of them.
pub fn minimal_hereditary_saturated(g: &Graph) -> Vec<VertexSet> {
    assert!(g.vertex_count() > 0, "graph has no vertices");
    let mut closures: Vec<VertexSet> = Vec::new();
    for v in g.vertices() {
        let c = hereditary_saturated_closure(g, &[v].into_iter().collect());
        if !closures.contains(&c) {
            closures.push(c);
        }
    }
    let mut minimal: Vec<VertexSet> = closures
        .iter()
        .filter(|c| {
            !closures
                .iter()
                .any(|other| *other != **c && other.is_subset(c))
        })
        .cloned()
        .collect();
    minimal.sort();
    minimal
}

/// Searches for a cycle with no exit. A cycle lacks an exit exactly when all
/// of its vertices have out-degree 1, so it suffices to follow the functional
/// graph induced on out-degree-1 vertices. Returns the cycle's edges starting
/// from its least vertex, or `None` when every cycle has an exit.
pub fn exit_free_cycle(g: &Graph) -> Option<Vec<EdgeId>> {
    let n = g.vertex_count();
    // 0 = unvisited, 1 = on current walk, 2 = finished
    let mut state = vec![0u8; n];
    for start in g.vertices() {
        if state[start.index()] != 0 || g.out_edges(start).len() != 1 {
            continue;
        }
        let mut walk: Vec<VertexId> = Vec::new();
        let mut cur = start;
        loop {
            if g.out_edges(cur).len() != 1 || state[cur.index()] == 2 {
                for w in &walk {
                    state[w.index()] = 2;
                }
                break;
            }
            if state[cur.index()] == 1 {
                // cur was reached twice on this walk: the tail from its first
                // occurrence is an exit-free cycle.
                let pos = walk.iter().position(|&w| w == cur).unwrap();
                let cycle = &walk[pos..];
                let least = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, v)| **v)
                    .map(|(i, _)| i)
                    .unwrap();
                let edges = (0..cycle.len())
                    .map(|i| g.out_edges(cycle[(least + i) % cycle.len()])[0])
                    .collect();
                return Some(edges);
            }
            state[cur.index()] = 1;
            walk.push(cur);
            cur = g.range(g.out_edges(cur)[0]);
        }
    }
    None
}

/// Condition (L): every cycle has an exit.
pub fn every_cycle_has_exit(g: &Graph) -> bool {
    exit_free_cycle(g).is_none()
}

/// Why a graph's Leavitt path algebra fails to be simple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplicityObstruction {
    /// A cycle none of whose vertices has a second out-edge.
    ExitFreeCycle(Vec<EdgeId>),
    /// A nonempty proper hereditary saturated vertex subset.
    ProperHereditarySaturated(VertexSet),
}

/// Simplicity of the graph's Leavitt path algebra together with an
/// obstruction when it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpaSimplicity {
    pub simple: bool,
    pub obstruction: Option<SimplicityObstruction>,
}

/// The algebra of a graph is simple iff every cycle has an exit and the only
/// hereditary saturated subsets are trivial (every singleton closure is the
/// full vertex set).
pub fn is_lpa_simple(g: &Graph) -> LpaSimplicity {
    assert!(g.vertex_count() > 0, "graph has no vertices");
    if let Some(cycle) = exit_free_cycle(g) {
        return LpaSimplicity {
            simple: false,
            obstruction: Some(SimplicityObstruction::ExitFreeCycle(cycle)),
        };
    }
    let full = g.full_vertex_set();
    for v in g.vertices() {
        let closure = hereditary_saturated_closure(g, &[v].into_iter().collect());
        if closure != full {
            return LpaSimplicity {
                simple: false,
                obstruction: Some(SimplicityObstruction::ProperHereditarySaturated(closure)),
            };
        }
    }
    LpaSimplicity {
        simple: true,
        obstruction: None,
    }
}

/// True iff every weak component is a single vertex that is either isolated
/// or carries exactly one edge, a loop. Exactly these graphs have a zero
/// commutator Lie algebra.
pub fn is_points_and_loops(g: &Graph) -> bool {
    weak_components(g).iter().all(|c| component_is_point_or_loop(g, c))
}

/// A single isolated vertex, or a single vertex whose only incident edge is
/// a loop.
pub fn component_is_point_or_loop(g: &Graph, component: &VertexSet) -> bool {
    if component.len() != 1 {
        return false;
    }
    let v = component.first().unwrap();
    match (g.out_edges(v), g.in_edges(v)) {
        ([], []) => true,
        ([e], [f]) => e == f && g.is_loop(*e),
        _ => false,
    }
}

/// Evaluation of the five balloon conditions for a vertex `v` over a subset
/// `w`: (i) v outside w, (ii) a loop at v, (iii) an edge from v into w,
/// (iv) no out-edges besides the loop and the edges into w, (v) no in-edges
/// besides the loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalloonWitness {
    pub vertex: VertexId,
    /// First declared loop at `vertex`, when one exists.
    pub loop_edge: Option<EdgeId>,
    /// Edges from `vertex` into the subset, declaration order.
    pub edges_into_subset: Vec<EdgeId>,
    pub outside_subset: bool,
    pub has_loop: bool,
    pub reaches_subset: bool,
    pub out_edges_confined: bool,
    pub in_edges_only_loop: bool,
}

impl BalloonWitness {
    /// Conjunction of the five condition flags.
    pub fn is_balloon(&self) -> bool {
        self.outside_subset
            && self.has_loop
            && self.reaches_subset
            && self.out_edges_confined
            && self.in_edges_only_loop
    }

    pub fn condition_flags(&self) -> [bool; 5] {
        [
            self.outside_subset,
            self.has_loop,
            self.reaches_subset,
            self.out_edges_confined,
            self.in_edges_only_loop,
        ]
    }
}

/// Evaluates the balloon conditions literally on edge sets. When `v` has no
/// loop, the singleton `{C}` in conditions (iv) and (v) is read as the empty
/// set; when `v` has several loops, `C` is the first declared one and (v)
/// necessarily fails.
pub fn is_balloon(g: &Graph, v: VertexId, w: &VertexSet) -> BalloonWitness {
    assert!(v.index() < g.vertex_count(), "vertex outside graph");
    assert!(!w.is_empty(), "balloon subset must be nonempty");
    let loop_edge = g.out_edges(v).iter().copied().find(|&e| g.is_loop(e));
    let edges_into_subset: Vec<EdgeId> = g
        .out_edges(v)
        .iter()
        .copied()
        .filter(|&e| w.contains(g.range(e)))
        .collect();

    let expected_out: BTreeSet<EdgeId> = loop_edge
        .iter()
        .copied()
        .chain(edges_into_subset.iter().copied())
        .collect();
    let actual_out: BTreeSet<EdgeId> = g.out_edges(v).iter().copied().collect();
    let actual_in: BTreeSet<EdgeId> = g.in_edges(v).iter().copied().collect();
    let expected_in: BTreeSet<EdgeId> = loop_edge.iter().copied().collect();

    BalloonWitness {
        vertex: v,
        loop_edge,
        outside_subset: !w.contains(v),
        has_loop: loop_edge.is_some(),
        reaches_subset: !edges_into_subset.is_empty(),
        out_edges_confined: actual_out == expected_out,
        in_edges_only_loop: actual_in == expected_in,
        edges_into_subset,
    }
}

/// True iff `e` runs from a source to a sink and is the unique edge into
/// that sink.
pub fn is_fiber(g: &Graph, e: EdgeId) -> bool {
    assert!(e.index() < g.edge_count(), "edge outside graph");
    let src = g.source(e);
    let dst = g.range(e);
    g.in_edges(src).is_empty() && g.is_sink(dst) && g.in_edges(dst) == [e]
}

/// Subgraph on `w` with exactly the edges whose source and range lie in `w`,
/// names and relative order preserved. Also returns, per new id, the vertex
/// and edge ids in the parent graph.
pub fn induced_subgraph_with_maps(g: &Graph, w: &VertexSet) -> (Graph, Vec<VertexId>, Vec<EdgeId>) {
    let mut vertex_map: Vec<VertexId> = Vec::with_capacity(w.len());
    let mut new_id = HashMap::new();
    let mut vertex_names = Vec::with_capacity(w.len());
    let mut names = HashMap::new();
    for v in w.iter() {
        assert!(v.index() < g.vertex_count(), "vertex outside graph");
        let id = VertexId(vertex_map.len() as u32);
        new_id.insert(v, id);
        names.insert(g.vertex_name(v).to_owned(), NameRef::Vertex(id));
        vertex_names.push(g.vertex_name(v).to_owned());
        vertex_map.push(v);
    }
    let mut edge_map = Vec::new();
    let mut edges = Vec::new();
    for e in g.edges() {
        if let (Some(&src), Some(&dst)) = (new_id.get(&g.source(e)), new_id.get(&g.range(e))) {
            let id = EdgeId(edges.len() as u32);
            names.insert(g.edge_name(e).to_owned(), NameRef::Edge(id));
            edges.push(EdgeRecord {
                name: g.edge_name(e).to_owned(),
                source: src,
                range: dst,
            });
            edge_map.push(e);
        }
    }
    (Graph::assemble(vertex_names, edges, names), vertex_map, edge_map)
}

/// Subgraph induced on `w`; see [`induced_subgraph_with_maps`].
pub fn induced_subgraph(g: &Graph, w: &VertexSet) -> Graph {
    induced_subgraph_with_maps(g, w).0
}
