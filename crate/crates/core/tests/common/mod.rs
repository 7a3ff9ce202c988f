#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use toponame::graph::{NodeId, ObjectType, ReducedEdge, ReducedGraph, ReducedNode, NodeRole, SkeletonGraph};
use toponame::synth::unit_graph;

/// Single-source shortest path lengths over an undirected weighted edge list.
pub fn dijkstra(edges: &[(NodeId, NodeId, f64)], src: NodeId) -> BTreeMap<NodeId, f64> {
    let mut adj: BTreeMap<NodeId, Vec<(NodeId, f64)>> = BTreeMap::new();
    for &(u, v, w) in edges {
        adj.entry(u).or_default().push((v, w));
        adj.entry(v).or_default().push((u, w));
    }
    let mut dist = BTreeMap::from([(src, 0.0)]);
    // distances are non-negative, so their bit patterns order like the values
    let mut heap = BinaryHeap::from([Reverse((0f64.to_bits(), src))]);
    while let Some(Reverse((d, x))) = heap.pop() {
        let d = f64::from_bits(d);
        if d > dist[&x] {
            continue;
        }
        for &(y, w) in adj.get(&x).map(Vec::as_slice).unwrap_or(&[]) {
            let nd = d + w;
            if dist.get(&y).is_none_or(|&old| nd < old) {
                dist.insert(y, nd);
                heap.push(Reverse((nd.to_bits(), y)));
            }
        }
    }
    dist
}

pub fn skeleton_edges(g: &SkeletonGraph) -> Vec<(NodeId, NodeId, f64)> {
    g.edges().iter().map(|e| (e.u, e.v, e.length)).collect()
}

pub fn reduced_edges(g: &ReducedGraph) -> Vec<(NodeId, NodeId, f64)> {
    g.edges().iter().map(|e| (e.u, e.v, e.length)).collect()
}

/// Reduced graph with unit edges on ids `0..n`; roles follow degree.
pub fn unit_reduced(id: &str, n: usize, edges: &[(usize, usize)]) -> ReducedGraph {
    let mut deg = vec![0; n];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    let nodes = (0..n)
        .map(|i| ReducedNode {
            id: i as u64,
            role: if deg[i] > 2 { NodeRole::Junction } else { NodeRole::Endpoint },
            position: [i as f64, 0.0, 0.0],
            source_ids: vec![i as u64],
        })
        .collect();
    let edges = edges
        .iter()
        .map(|&(u, v)| ReducedEdge {
            u: u as u64,
            v: v as u64,
            length: 1.0,
            thickness: 1.0,
            skeleton_path: vec![],
        })
        .collect();
    ReducedGraph::new(id, ObjectType::Other, nodes, edges).unwrap()
}

/// AHU encoding of a tree rooted at `r`.
fn rooted_code(adj: &[Vec<usize>], r: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[r].iter().filter(|&&c| c != parent).map(|&c| rooted_code(adj, c, r)).collect();
    kids.sort();
    format!("({})", kids.concat())
}

/// Isomorphism-invariant code of a free tree, via its center(s).
pub fn tree_code(n: usize, edges: &[(usize, usize)]) -> String {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    if n <= 2 {
        return format!("{n}");
    }
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &u in &adj[v] {
                deg[u] -= 1;
                if deg[u] == 1 {
                    next.push(u);
                }
            }
        }
        layer = next;
    }
    layer.iter().map(|&c| rooted_code(&adj, c, usize::MAX)).min().unwrap()
}

/// Every unlabeled tree on `n` vertices, once each, as edge lists on `0..n`.
pub fn all_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut level: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for size in 2..=n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for t in &level {
            for attach in 0..size - 1 {
                let mut e = t.clone();
                e.push((attach, size - 1));
                if seen.insert(tree_code(size, &e)) {
                    next.push(e);
                }
            }
        }
        level = next;
    }
    if n == 0 {
        Vec::new()
    } else {
        level
    }
}

/// Every labeled tree on `n` vertices, decoded from all Prüfer sequences.
pub fn all_labeled_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n < 2 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let total = n.pow(n as u32 - 2);
    for mut code in 0..total {
        let mut seq = Vec::with_capacity(n - 2);
        for _ in 0..n - 2 {
            seq.push(code % n);
            code /= n;
        }
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut edges = Vec::new();
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
            edges.push((leaf, s));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        edges.push((rest[0], rest[1]));
        out.push(edges);
    }
    out
}

pub fn unit_skeleton(n: usize, edges: &[(usize, usize)]) -> SkeletonGraph {
    unit_graph(format!("g{n}"), n, edges)
}
