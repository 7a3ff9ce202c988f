//! Deterministic, invertible names for reduced graph topologies.

pub mod ast;
mod canon;
pub mod numeral;
pub mod parse;

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{GraphView, NodeId, ObjectType, ReducedGraph};

pub use ast::{natural_cmp, render, Core, NameAst, Suffix};
pub use numeral::numeral;
pub use parse::{parse_name, parse_name_ast, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("numeral requires a positive count")]
    NonPositive,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph contains a cycle")]
    HasCycle,
    #[error("node {0} not in graph")]
    UnknownNode(NodeId),
}

/// Canonical name plus the syntax tree of each component, in name order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Name {
    pub text: String,
    pub components: Vec<NameAst>,
}

fn local_components<G: GraphView + ?Sized>(g: &G) -> Vec<Vec<Vec<usize>>> {
    let topo = g.topology();
    let (labels, count) = topo.component_labels();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    let mut local = vec![0usize; topo.len()];
    for (v, &c) in labels.iter().enumerate() {
        local[v] = members[c].len();
        members[c].push(v);
    }
    members
        .iter()
        .map(|vs| vs.iter().map(|&v| topo.adj[v].iter().map(|&x| local[x]).collect()).collect())
        .collect()
}

/// Names every connected component and joins them with `+` in string order.
pub fn name_graph<G: GraphView + ?Sized>(g: &G, object_type: ObjectType) -> Result<Name, NameError> {
    let comps = local_components(g);
    if comps.is_empty() {
        return Err(NameError::EmptyGraph);
    }
    let suffix = Suffix::for_type(object_type);
    let mut named: Vec<(NameAst, String)> = comps.iter().map(|adj| canon::name_component(adj, suffix)).collect();
    named.sort_by(|a, b| natural_cmp(&a.1, &b.1));
    let text = named.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>().join("+");
    Ok(Name {
        text,
        components: named.into_iter().map(|(a, _)| a).collect(),
    })
}

/// Name of a reduced graph using its own object type.
pub fn name_reduced(g: &ReducedGraph) -> Result<Name, NameError> {
    name_graph(g, g.object_type())
}

/// True when both graphs receive the same canonical name.
pub fn canonical_equal<A: GraphView + ?Sized, B: GraphView + ?Sized>(a: &A, b: &B) -> Result<bool, NameError> {
    Ok(name_graph(a, ObjectType::Other)?.text == name_graph(b, ObjectType::Other)?.text)
}

/// A longest simple path in the tree containing `start`, as node ids.
///
/// Two breadth-first sweeps: the first from the smallest-id leaf of the
/// component, the second from the farthest node found. Distance ties go to
/// the smaller node id.
pub fn longest_path<G: GraphView + ?Sized>(g: &G, start: NodeId) -> Result<Vec<NodeId>, NameError> {
    let topo = g.topology();
    let s = topo.ids.binary_search(&start).map_err(|_| NameError::UnknownNode(start))?;
    let (labels, _) = topo.component_labels();
    let members: Vec<usize> = (0..topo.len()).filter(|&v| labels[v] == labels[s]).collect();
    let edges: usize = members.iter().map(|&v| topo.adj[v].len()).sum::<usize>() / 2;
    if edges + 1 != members.len() {
        return Err(NameError::HasCycle);
    }
    let sweep = |src: usize| -> (usize, Vec<usize>) {
        let mut dist = vec![usize::MAX; topo.len()];
        let mut parent = vec![usize::MAX; topo.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        let mut far = src;
        while let Some(x) = queue.pop_front() {
            if dist[x] > dist[far] || (dist[x] == dist[far] && x < far) {
                far = x;
            }
            for &y in &topo.adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        (far, parent)
    };
    let leaf = members.iter().copied().find(|&v| topo.adj[v].len() <= 1).unwrap_or(s);
    let (a, _) = sweep(leaf);
    let (b, parent) = sweep(a);
    let mut path = vec![topo.ids[b]];
    let mut cur = b;
    while cur != a {
        cur = parent[cur];
        path.push(topo.ids[cur]);
    }
    path.reverse();
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{SkeletonEdge, SkeletonGraph, SkeletonNode};

    fn skel(ids: &[u64], edges: &[(u64, u64)]) -> SkeletonGraph {
        let nodes = ids
            .iter()
            .map(|&id| SkeletonNode {
                id,
                position: [id as f64, 0.0, 0.0],
                radius: 1.0,
            })
            .collect();
        let edges = edges.iter().map(|&(u, v)| SkeletonEdge { u, v, length: 1.0 }).collect();
        SkeletonGraph::new("t", ObjectType::Other, nodes, edges).unwrap()
    }

    #[test]
    fn components_join_in_order() {
        let g = skel(&[1, 2, 3, 10, 11, 12], &[(1, 2), (2, 3), (10, 11), (11, 12), (12, 10)]);
        let name = name_graph(&g, ObjectType::Mitochondrion).unwrap();
        assert_eq!(name.text, "cyclotriito+triito");
        assert_eq!(name.components.len(), 2);
    }

    #[test]
    fn empty_graph_rejected() {
        let g = skel(&[], &[]);
        assert_eq!(name_graph(&g, ObjectType::Other), Err(NameError::EmptyGraph));
    }

    #[test]
    fn longest_path_tie_breaking() {
        let g = skel(&[5, 6, 7, 8], &[(5, 6), (6, 7), (6, 8)]);
        let p = longest_path(&g, 6).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p, vec![7, 6, 5]);
        let cyc = skel(&[1, 2, 3], &[(1, 2), (2, 3), (1, 3)]);
        assert_eq!(longest_path(&cyc, 1), Err(NameError::HasCycle));
        assert_eq!(longest_path(&g, 99), Err(NameError::UnknownNode(99)));
    }

    #[test]
    fn relabeling_keeps_name() {
        let a = skel(&[1, 2, 3, 4, 5], &[(1, 2), (2, 3), (3, 4), (2, 5)]);
        let b = skel(&[40, 30, 20, 10, 0], &[(40, 30), (30, 20), (20, 10), (30, 0)]);
        assert!(canonical_equal(&a, &b).unwrap());
    }
}
