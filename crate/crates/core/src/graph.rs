//! Skeleton graphs, reduced graphs, validation and file I/O.
//!
//! Both graph kinds are immutable once constructed. Nodes are kept sorted by
//! id and edges are stored with `u < v`, sorted by `(u, v)`, which makes the
//! serialized form canonical for a given labeling.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("edge ({u}, {v}) references unknown node {missing}")]
    DanglingEdge {
        u: NodeId,
        v: NodeId,
        missing: NodeId,
    },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("self loop at node {0}")]
    SelfLoopAtIngest(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge ({0}, {1})")]
    UnknownEdge(NodeId, NodeId),
}

/// Category of the imaged object; selects the name suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectType {
    #[serde(rename = "mito")]
    Mitochondrion,
    #[serde(rename = "pyr")]
    PyramidalNeuron,
    #[serde(rename = "other")]
    Other,
}

impl ObjectType {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectType::Mitochondrion => "mito",
            ObjectType::PyramidalNeuron => "pyr",
            ObjectType::Other => "other",
        }
    }
}

impl std::str::FromStr for ObjectType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mito" => Ok(ObjectType::Mitochondrion),
            "pyr" => Ok(ObjectType::PyramidalNeuron),
            "other" => Ok(ObjectType::Other),
            _ => Err(format!("unknown object type '{s}' (expected mito, pyr or other)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonNode {
    pub id: NodeId,
    pub position: [f64; 3],
    /// Distance-transform value at the node.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub length: f64,
}

/// Raw weighted undirected skeleton.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonGraph {
    object_id: String,
    object_type: ObjectType,
    nodes: Vec<SkeletonNode>,
    edges: Vec<SkeletonEdge>,
}

/// Role of a node in a reduced graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Junction,
    Endpoint,
    /// Inserted to split a parallel path or a loop.
    Mid,
    /// Stand-in key node for a component that has none (a pure cycle).
    Anchor,
}

impl NodeRole {
    pub fn initial(self) -> char {
        match self {
            NodeRole::Junction => 'J',
            NodeRole::Endpoint => 'E',
            NodeRole::Mid => 'M',
            NodeRole::Anchor => 'A',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedNode {
    pub id: NodeId,
    pub role: NodeRole,
    pub position: [f64; 3],
    /// Skeleton node ids merged into this node.
    pub source_ids: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub length: f64,
    pub thickness: f64,
    pub skeleton_path: Vec<NodeId>,
}

/// Simple graph over key nodes and inserted mid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGraph {
    object_id: String,
    object_type: ObjectType,
    nodes: Vec<ReducedNode>,
    edges: Vec<ReducedEdge>,
}

/// Index-based adjacency used by the algorithms. Index `i` refers to the
/// `i`-th node in id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub ids: Vec<NodeId>,
    pub adj: Vec<Vec<usize>>,
}

impl Topology {
    pub fn from_edges(ids: Vec<NodeId>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); ids.len()];
        for (a, b) in pairs {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Topology { ids, adj }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Component label per node, numbered in order of first node index.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &y in &self.adj[x] {
                    if label[y] == usize::MAX {
                        label[y] = count;
                        queue.push_back(y);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn components_and_cycle_rank(&self) -> (usize, usize) {
        let (_, c) = self.component_labels();
        let e = self.edge_count();
        // |E| - |V| + c is never negative for a simple graph
        (c, e + c - self.len())
    }
}

/// Common read-only view over both graph kinds.
pub trait GraphView {
    fn topology(&self) -> Topology;
}

/// Number of connected components and first Betti number `|E| - |V| + c`.
pub fn components_and_cycle_rank<G: GraphView + ?Sized>(g: &G) -> (usize, usize) {
    g.topology().components_and_cycle_rank()
}

fn check_position(id: NodeId, p: &[f64; 3]) -> Result<(), GraphError> {
    if p.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(GraphError::InvalidValue(format!("node {id} has a non-finite coordinate")))
    }
}

fn normalized(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

fn check_edges<'a>(
    ids: &[NodeId],
    edges: impl Iterator<Item = (NodeId, NodeId, f64)> + 'a,
) -> Result<(), GraphError> {
    let mut seen = BTreeSet::new();
    for (u, v, length) in edges {
        if u == v {
            return Err(GraphError::SelfLoopAtIngest(u));
        }
        for end in [u, v] {
            if ids.binary_search(&end).is_err() {
                return Err(GraphError::DanglingEdge { u, v, missing: end });
            }
        }
        if !seen.insert(normalized(u, v)) {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(GraphError::InvalidValue(format!(
                "edge ({u}, {v}) has non-positive length {length}"
            )));
        }
    }
    Ok(())
}

fn sorted_ids<T>(items: &[T], id: impl Fn(&T) -> NodeId) -> Result<Vec<NodeId>, GraphError> {
    let ids: Vec<NodeId> = items.iter().map(&id).collect();
    for w in ids.windows(2) {
        if w[0] == w[1] {
            return Err(GraphError::DuplicateNode(w[0]));
        }
    }
    Ok(ids)
}

impl SkeletonGraph {
    /// Validates and canonicalizes (sorts nodes, orients edges `u < v`).
    pub fn new(
        object_id: impl Into<String>,
        object_type: ObjectType,
        mut nodes: Vec<SkeletonNode>,
        mut edges: Vec<SkeletonEdge>,
    ) -> Result<Self, GraphError> {
        nodes.sort_by_key(|n| n.id);
        let ids = sorted_ids(&nodes, |n| n.id)?;
        for n in &nodes {
            check_position(n.id, &n.position)?;
            if !(n.radius.is_finite() && n.radius >= 0.0) {
                return Err(GraphError::InvalidValue(format!(
                    "node {} has invalid radius {}",
                    n.id, n.radius
                )));
            }
        }
        check_edges(&ids, edges.iter().map(|e| (e.u, e.v, e.length)))?;
        for e in &mut edges {
            (e.u, e.v) = normalized(e.u, e.v);
        }
        edges.sort_by_key(|e| (e.u, e.v));
        Ok(SkeletonGraph {
            object_id: object_id.into(),
            object_type,
            nodes,
            edges,
        })
    }

    pub fn object_id(&self) -> &str {
        &self.object_id
    }

    pub fn object_type(&self) -> ObjectType {
        self.object_type
    }

    pub fn nodes(&self) -> &[SkeletonNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[SkeletonEdge] {
        &self.edges
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn node(&self, id: NodeId) -> Option<&SkeletonNode> {
        self.node_index(id).map(|i| &self.nodes[i])
    }

    pub fn edge(&self, u: NodeId, v: NodeId) -> Option<&SkeletonEdge> {
        let key = normalized(u, v);
        self.edges
            .binary_search_by_key(&key, |e| (e.u, e.v))
            .ok()
            .map(|i| &self.edges[i])
    }

    /// Count of incident edges.
    pub fn degree(&self, id: NodeId) -> Result<usize, GraphError> {
        if self.node_index(id).is_none() {
            return Err(GraphError::UnknownNode(id));
        }
        Ok(self.edges.iter().filter(|e| e.u == id || e.v == id).count())
    }

    pub fn with_object_type(mut self, object_type: ObjectType) -> Self {
        self.object_type = object_type;
        self
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }
}

impl GraphView for SkeletonGraph {
    fn topology(&self) -> Topology {
        let ids: Vec<NodeId> = self.nodes.iter().map(|n| n.id).collect();
        let pairs: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|e| (self.node_index(e.u).unwrap(), self.node_index(e.v).unwrap()))
            .collect();
        Topology::from_edges(ids, pairs)
    }
}

impl ReducedGraph {
    /// Validates that the graph is simple and canonicalizes storage order.
    pub fn new(
        object_id: impl Into<String>,
        object_type: ObjectType,
        mut nodes: Vec<ReducedNode>,
        mut edges: Vec<ReducedEdge>,
    ) -> Result<Self, GraphError> {
        nodes.sort_by_key(|n| n.id);
        let ids = sorted_ids(&nodes, |n| n.id)?;
        for n in &nodes {
            check_position(n.id, &n.position)?;
        }
        check_edges(&ids, edges.iter().map(|e| (e.u, e.v, e.length)))?;
        for e in &mut edges {
            if !(e.thickness.is_finite() && e.thickness >= 0.0) {
                return Err(GraphError::InvalidValue(format!(
                    "edge ({}, {}) has invalid thickness {}",
                    e.u, e.v, e.thickness
                )));
            }
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
                e.skeleton_path.reverse();
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        Ok(ReducedGraph {
            object_id: object_id.into(),
            object_type,
            nodes,
            edges,
        })
    }

    pub fn empty(object_id: impl Into<String>, object_type: ObjectType) -> Self {
        ReducedGraph {
            object_id: object_id.into(),
            object_type,
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn object_id(&self) -> &str {
        &self.object_id
    }

    pub fn object_type(&self) -> ObjectType {
        self.object_type
    }

    pub fn nodes(&self) -> &[ReducedNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[ReducedEdge] {
        &self.edges
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn node(&self, id: NodeId) -> Option<&ReducedNode> {
        self.node_index(id).map(|i| &self.nodes[i])
    }

    pub fn degree(&self, id: NodeId) -> Result<usize, GraphError> {
        if self.node_index(id).is_none() {
            return Err(GraphError::UnknownNode(id));
        }
        Ok(self.edges.iter().filter(|e| e.u == id || e.v == id).count())
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn with_object_type(mut self, object_type: ObjectType) -> Self {
        self.object_type = object_type;
        self
    }

    pub fn with_object_id(mut self, object_id: impl Into<String>) -> Self {
        self.object_id = object_id.into();
        self
    }

    /// Same topology with node ids replaced through `map` (must be injective).
    pub fn relabeled(&self, map: impl Fn(NodeId) -> NodeId) -> Result<Self, GraphError> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| ReducedNode {
                id: map(n.id),
                ..n.clone()
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| ReducedEdge {
                u: map(e.u),
                v: map(e.v),
                ..e.clone()
            })
            .collect();
        ReducedGraph::new(self.object_id.clone(), self.object_type, nodes, edges)
    }
}

impl GraphView for ReducedGraph {
    fn topology(&self) -> Topology {
        let ids: Vec<NodeId> = self.nodes.iter().map(|n| n.id).collect();
        let pairs: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|e| (self.node_index(e.u).unwrap(), self.node_index(e.v).unwrap()))
            .collect();
        Topology::from_edges(ids, pairs)
    }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkeletonDoc {
    id: String,
    #[serde(rename = "type")]
    object_type: ObjectType,
    nodes: Vec<SkeletonNodeDoc>,
    edges: Vec<SkeletonEdgeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkeletonNodeDoc {
    id: NodeId,
    x: f64,
    y: f64,
    z: f64,
    #[serde(default)]
    radius: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkeletonEdgeDoc {
    u: NodeId,
    v: NodeId,
    #[serde(default)]
    length: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReducedDoc {
    id: String,
    #[serde(rename = "type")]
    object_type: ObjectType,
    nodes: Vec<ReducedNodeDoc>,
    edges: Vec<ReducedEdgeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReducedNodeDoc {
    id: NodeId,
    role: NodeRole,
    x: f64,
    y: f64,
    z: f64,
    #[serde(default)]
    source_ids: Vec<NodeId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReducedEdgeDoc {
    u: NodeId,
    v: NodeId,
    length: f64,
    thickness: f64,
    #[serde(default)]
    skeleton_path: Vec<NodeId>,
}

fn classify_json_error(err: serde_json::Error) -> GraphError {
    use serde_json::error::Category;
    match err.classify() {
        Category::Data => GraphError::SchemaViolation(err.to_string()),
        _ => GraphError::MalformedDocument(err.to_string()),
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Parses a skeleton document. Missing edge lengths become the Euclidean
/// distance between endpoints; missing radii become 1.0.
pub fn load_skeleton(bytes: &[u8]) -> Result<SkeletonGraph, GraphError> {
    let doc: SkeletonDoc = serde_json::from_slice(bytes).map_err(classify_json_error)?;
    let nodes: Vec<SkeletonNode> = doc
        .nodes
        .iter()
        .map(|n| SkeletonNode {
            id: n.id,
            position: [n.x, n.y, n.z],
            radius: n.radius.unwrap_or(1.0),
        })
        .collect();
    let mut by_id: Vec<(NodeId, [f64; 3])> = nodes.iter().map(|n| (n.id, n.position)).collect();
    by_id.sort_by_key(|p| p.0);
    let lookup = |id: NodeId| {
        by_id
            .binary_search_by_key(&id, |p| p.0)
            .ok()
            .map(|i| by_id[i].1)
    };
    let mut edges = Vec::with_capacity(doc.edges.len());
    for e in &doc.edges {
        let length = match e.length {
            Some(l) => l,
            None => {
                let pu = lookup(e.u).ok_or(GraphError::DanglingEdge {
                    u: e.u,
                    v: e.v,
                    missing: e.u,
                })?;
                let pv = lookup(e.v).ok_or(GraphError::DanglingEdge {
                    u: e.u,
                    v: e.v,
                    missing: e.v,
                })?;
                distance(&pu, &pv)
            }
        };
        edges.push(SkeletonEdge {
            u: e.u,
            v: e.v,
            length,
        });
    }
    SkeletonGraph::new(doc.id, doc.object_type, nodes, edges)
}

/// Canonical serialization: nodes by id, edges by `(min id, max id)`.
pub fn save_skeleton(g: &SkeletonGraph) -> String {
    let doc = SkeletonDoc {
        id: g.object_id.clone(),
        object_type: g.object_type,
        nodes: g
            .nodes
            .iter()
            .map(|n| SkeletonNodeDoc {
                id: n.id,
                x: n.position[0],
                y: n.position[1],
                z: n.position[2],
                radius: Some(n.radius),
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| SkeletonEdgeDoc {
                u: e.u,
                v: e.v,
                length: Some(e.length),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("skeleton serializes");
    out.push('\n');
    out
}

pub fn load_reduced(bytes: &[u8]) -> Result<ReducedGraph, GraphError> {
    let doc: ReducedDoc = serde_json::from_slice(bytes).map_err(classify_json_error)?;
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| ReducedNode {
            id: n.id,
            role: n.role,
            position: [n.x, n.y, n.z],
            source_ids: n.source_ids,
        })
        .collect();
    let edges = doc
        .edges
        .into_iter()
        .map(|e| ReducedEdge {
            u: e.u,
            v: e.v,
            length: e.length,
            thickness: e.thickness,
            skeleton_path: e.skeleton_path,
        })
        .collect();
    ReducedGraph::new(doc.id, doc.object_type, nodes, edges)
}

pub fn save_reduced(g: &ReducedGraph) -> String {
    let doc = ReducedDoc {
        id: g.object_id.clone(),
        object_type: g.object_type,
        nodes: g
            .nodes
            .iter()
            .map(|n| ReducedNodeDoc {
                id: n.id,
                role: n.role,
                x: n.position[0],
                y: n.position[1],
                z: n.position[2],
                source_ids: n.source_ids.clone(),
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| ReducedEdgeDoc {
                u: e.u,
                v: e.v,
                length: e.length,
                thickness: e.thickness,
                skeleton_path: e.skeleton_path.clone(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("reduced graph serializes");
    out.push('\n');
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT rendering. Skeleton nodes are labeled by their key-node class
/// (`J`, `E`, or empty for chain nodes).
pub fn skeleton_to_dot(g: &SkeletonGraph) -> String {
    let topo = g.topology();
    let mut out = format!("graph \"{}\" {{\n", dot_escape(&g.object_id));
    for (i, n) in g.nodes.iter().enumerate() {
        let label = match topo.degree(i) {
            0 | 1 => "E",
            2 => "",
            _ => "J",
        };
        let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, label);
    }
    for e in &g.edges {
        let _ = writeln!(out, "  n{} -- n{} [label=\"{:.1}\"];", e.u, e.v, e.length);
    }
    out.push_str("}\n");
    out
}

/// DOT rendering with node label = role initial. `colors` optionally maps
/// node ids to fill colors.
pub fn reduced_to_dot(g: &ReducedGraph, colors: Option<&dyn Fn(NodeId) -> Option<String>>) -> String {
    let mut out = format!("graph \"{}\" {{\n", dot_escape(&g.object_id));
    for n in &g.nodes {
        let fill = colors.and_then(|c| c(n.id));
        match fill {
            Some(color) => {
                let _ = writeln!(
                    out,
                    "  n{} [label=\"{}\", style=filled, fillcolor=\"{}\"];",
                    n.id,
                    n.role.initial(),
                    dot_escape(&color)
                );
            }
            None => {
                let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, n.role.initial());
            }
        }
    }
    for e in &g.edges {
        let _ = writeln!(out, "  n{} -- n{} [label=\"{:.1}\"];", e.u, e.v, e.length);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: NodeId, x: f64, y: f64, z: f64) -> SkeletonNode {
        SkeletonNode {
            id,
            position: [x, y, z],
            radius: 1.0,
        }
    }

    fn edge(u: NodeId, v: NodeId) -> SkeletonEdge {
        SkeletonEdge { u, v, length: 1.0 }
    }

    fn graph(n: u64, edges: &[(u64, u64)]) -> SkeletonGraph {
        let nodes = (0..n).map(|i| node(i, i as f64, 0.0, 0.0)).collect();
        let edges = edges.iter().map(|&(u, v)| edge(u, v)).collect();
        SkeletonGraph::new("g", ObjectType::Other, nodes, edges).unwrap()
    }

    #[test]
    fn missing_length_is_euclidean() {
        let doc = br#"{"id":"a","type":"mito",
            "nodes":[{"id":0,"x":0,"y":0,"z":0},{"id":1,"x":3,"y":4,"z":0}],
            "edges":[{"u":0,"v":1}]}"#;
        let g = load_skeleton(doc).unwrap();
        assert_eq!(g.edges()[0].length, 5.0);
        assert_eq!(g.nodes()[0].radius, 1.0);
        assert_eq!(g.object_type(), ObjectType::Mitochondrion);
    }

    #[test]
    fn dangling_edge() {
        let doc = br#"{"id":"a","type":"other",
            "nodes":[{"id":0,"x":0,"y":0,"z":0}],
            "edges":[{"u":0,"v":99,"length":1.0}]}"#;
        assert!(matches!(
            load_skeleton(doc),
            Err(GraphError::DanglingEdge { missing: 99, .. })
        ));
        let doc = br#"{"id":"a","type":"other",
            "nodes":[{"id":0,"x":0,"y":0,"z":0}],
            "edges":[{"u":0,"v":99}]}"#;
        assert!(matches!(
            load_skeleton(doc),
            Err(GraphError::DanglingEdge { missing: 99, .. })
        ));
    }

    #[test]
    fn ingest_errors() {
        assert!(matches!(
            load_skeleton(b"{not json"),
            Err(GraphError::MalformedDocument(_))
        ));
        assert!(matches!(
            load_skeleton(br#"{"id":"a","type":"mito","nodes":[]}"#),
            Err(GraphError::SchemaViolation(_))
        ));
        let dup = br#"{"id":"a","type":"mito",
            "nodes":[{"id":0,"x":0,"y":0,"z":0},{"id":1,"x":1,"y":0,"z":0}],
            "edges":[{"u":0,"v":1},{"u":1,"v":0}]}"#;
        assert!(matches!(load_skeleton(dup), Err(GraphError::DuplicateEdge(1, 0))));
        let selfloop = br#"{"id":"a","type":"mito",
            "nodes":[{"id":0,"x":0,"y":0,"z":0}],
            "edges":[{"u":0,"v":0,"length":1}]}"#;
        assert!(matches!(load_skeleton(selfloop), Err(GraphError::SelfLoopAtIngest(0))));
    }

    #[test]
    fn empty_graph_document() {
        let g = SkeletonGraph::new("e", ObjectType::Other, vec![], vec![]).unwrap();
        let text = save_skeleton(&g);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 0);
        assert_eq!(v["edges"].as_array().unwrap().len(), 0);
        assert_eq!(load_skeleton(text.as_bytes()).unwrap(), g);
    }

    #[test]
    fn serialization_is_id_faithful() {
        let a = graph(3, &[(0, 1), (1, 2)]);
        let b = graph(3, &[(0, 2), (2, 1)]);
        assert_ne!(save_skeleton(&a), save_skeleton(&b));
    }

    #[test]
    fn degrees() {
        let isolated = graph(1, &[]);
        assert_eq!(isolated.degree(0).unwrap(), 0);
        let star = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(star.degree(0).unwrap(), 4);
        let cycle = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert!((0..5).all(|i| cycle.degree(i).unwrap() == 2));
        assert_eq!(cycle.degree(17), Err(GraphError::UnknownNode(17)));
    }

    #[test]
    fn cycle_rank_examples() {
        let tree = graph(8, &[(0, 1), (1, 2), (2, 3), (1, 4), (4, 5), (5, 6), (0, 7)]);
        assert_eq!(components_and_cycle_rank(&tree), (1, 0));
        let six = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        assert_eq!(components_and_cycle_rank(&six), (1, 1));
        let triangles = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        assert_eq!(components_and_cycle_rank(&triangles), (2, 2));
    }

    #[test]
    fn reduced_round_trip_and_dot() {
        let nodes = vec![
            ReducedNode {
                id: 4,
                role: NodeRole::Endpoint,
                position: [0.0, 0.0, 0.0],
                source_ids: vec![4],
            },
            ReducedNode {
                id: 2,
                role: NodeRole::Endpoint,
                position: [1.0, 0.0, 0.0],
                source_ids: vec![2],
            },
        ];
        let edges = vec![ReducedEdge {
            u: 4,
            v: 2,
            length: 2.25,
            thickness: 1.0,
            skeleton_path: vec![4, 3, 2],
        }];
        let g = ReducedGraph::new("r", ObjectType::PyramidalNeuron, nodes, edges).unwrap();
        assert_eq!(g.edges()[0].u, 2);
        assert_eq!(g.edges()[0].skeleton_path, vec![2, 3, 4]);
        let back = load_reduced(save_reduced(&g).as_bytes()).unwrap();
        assert_eq!(back, g);
        let dot = reduced_to_dot(&g, None);
        assert!(dot.contains("n2 [label=\"E\"]"));
        assert!(dot.contains("n2 -- n4 [label=\"2.2\"]") || dot.contains("n2 -- n4 [label=\"2.3\"]"));
    }
}
