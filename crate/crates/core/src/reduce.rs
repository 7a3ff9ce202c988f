//! Skeleton graph to reduced graph.
//!
//! The traversal visits key nodes only (junctions, endpoints) in breadth-first
//! order and turns every simple path between key nodes into reduced edges.
//! Parallel paths and loops are split with inserted mid nodes so the result
//! stays a simple graph with the skeleton's cycle rank.
//!
//! Post-processing contracts short edges and then fuses away nodes that
//! contraction demoted to degree 2. Both passes work on a path multigraph in
//! which chains of mid nodes are collapsed back into single edges, so a split
//! path is judged by its full length and not by its halves.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::graph::{
    GraphError, GraphView, NodeId, NodeRole, ObjectType, ReducedEdge, ReducedGraph, ReducedNode,
    SkeletonEdge, SkeletonGraph, Topology,
};

/// Path between key nodes through degree-2 skeleton nodes only.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplePath {
    pub src: NodeId,
    pub trg: NodeId,
    pub interior: Vec<NodeId>,
    pub length: f64,
    /// Length-weighted mean of the edge thicknesses.
    pub thickness: f64,
}

impl SimplePath {
    pub fn is_loop(&self) -> bool {
        self.src == self.trg
    }

    fn sequence(&self) -> Vec<NodeId> {
        let mut seq = Vec::with_capacity(self.interior.len() + 2);
        seq.push(self.src);
        seq.extend_from_slice(&self.interior);
        seq.push(self.trg);
        seq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TauMode {
    /// Threshold in edge-length units.
    #[default]
    Absolute,
    /// Threshold as a fraction of the total reduced-graph edge length.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReduceConfig {
    pub tau: f64,
    pub preserve_loops: bool,
    pub smooth_degree2: bool,
    pub tau_mode: TauMode,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            tau: 4.0,
            preserve_loops: true,
            smooth_degree2: true,
            tau_mode: TauMode::Absolute,
        }
    }
}

impl ReduceConfig {
    /// Topology-exact settings: no contraction, loops kept, no smoothing.
    pub fn exact() -> Self {
        ReduceConfig {
            tau: 0.0,
            preserve_loops: true,
            smooth_degree2: false,
            tau_mode: TauMode::Absolute,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyNodes {
    pub junctions: BTreeSet<NodeId>,
    pub endpoints: BTreeSet<NodeId>,
}

/// Junctions have degree > 2, endpoints degree 1. Isolated nodes count as
/// endpoints.
pub fn classify_key_nodes(g: &SkeletonGraph) -> KeyNodes {
    let topo = g.topology();
    let mut keys = KeyNodes::default();
    for (i, &id) in topo.ids.iter().enumerate() {
        match topo.degree(i) {
            0 | 1 => {
                keys.endpoints.insert(id);
            }
            2 => {}
            _ => {
                keys.junctions.insert(id);
            }
        }
    }
    keys
}

/// Mean of the two endpoint radii.
pub fn edge_thickness(g: &SkeletonGraph, e: &SkeletonEdge) -> Result<f64, GraphError> {
    let stored = g.edge(e.u, e.v).ok_or(GraphError::UnknownEdge(e.u, e.v))?;
    Ok(thickness_of(g, stored))
}

fn thickness_of(g: &SkeletonGraph, e: &SkeletonEdge) -> f64 {
    let ru = g.node(e.u).map_or(0.0, |n| n.radius);
    let rv = g.node(e.v).map_or(0.0, |n| n.radius);
    (ru + rv) / 2.0
}

struct Walk<'a> {
    g: &'a SkeletonGraph,
    topo: Topology,
    /// Key nodes plus anchors.
    is_key: Vec<bool>,
    anchors: BTreeSet<usize>,
}

impl<'a> Walk<'a> {
    fn new(g: &'a SkeletonGraph) -> Self {
        let topo = g.topology();
        let mut is_key: Vec<bool> = (0..topo.len()).map(|i| topo.degree(i) != 2).collect();
        let (labels, count) = topo.component_labels();
        let mut has_key = vec![false; count];
        for i in 0..topo.len() {
            has_key[labels[i]] |= is_key[i];
        }
        let mut anchors = BTreeSet::new();
        // nodes are in id order, so the first hit per component has the smallest id
        for i in 0..topo.len() {
            if !has_key[labels[i]] {
                has_key[labels[i]] = true;
                is_key[i] = true;
                anchors.insert(i);
            }
        }
        Walk {
            g,
            topo,
            is_key,
            anchors,
        }
    }

    fn edge_between(&self, a: usize, b: usize) -> &SkeletonEdge {
        self.g
            .edge(self.topo.ids[a], self.topo.ids[b])
            .expect("adjacency comes from the edge list")
    }

    fn paths(&self) -> Vec<SimplePath> {
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let mut out = Vec::new();
        for k in 0..self.topo.len() {
            if !self.is_key[k] {
                continue;
            }
            for &first in &self.topo.adj[k] {
                if used.contains(&key(k, first)) {
                    continue;
                }
                let mut prev = k;
                let mut cur = first;
                let mut interior = Vec::new();
                let mut length = 0.0;
                let mut weighted = 0.0;
                loop {
                    used.insert(key(prev, cur));
                    let e = self.edge_between(prev, cur);
                    length += e.length;
                    weighted += thickness_of(self.g, e) * e.length;
                    if self.is_key[cur] {
                        break;
                    }
                    interior.push(self.topo.ids[cur]);
                    let next = *self.topo.adj[cur]
                        .iter()
                        .find(|&&x| x != prev)
                        .expect("chain nodes have degree 2");
                    prev = cur;
                    cur = next;
                }
                out.push(SimplePath {
                    src: self.topo.ids[k],
                    trg: self.topo.ids[cur],
                    interior,
                    length,
                    thickness: weighted / length,
                });
            }
        }
        out
    }
}

/// Every simple path once. Components without key nodes (pure cycles) use
/// their smallest-id node as the path end, so each yields one loop path.
pub fn enumerate_simple_paths(g: &SkeletonGraph) -> Vec<SimplePath> {
    Walk::new(g).paths()
}

/// Point at arc-length fraction `f` along a skeleton node sequence.
fn point_along(g: &SkeletonGraph, seq: &[NodeId], f: f64) -> [f64; 3] {
    let pos = |id: NodeId| g.node(id).map(|n| n.position).unwrap_or([0.0; 3]);
    let lens: Vec<f64> = seq
        .windows(2)
        .map(|w| g.edge(w[0], w[1]).map_or(0.0, |e| e.length))
        .collect();
    let total: f64 = lens.iter().sum();
    let mut target = f * total;
    for (i, len) in lens.iter().enumerate() {
        if target <= *len || i + 1 == lens.len() {
            let t = if *len > 0.0 { (target / len).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (pos(seq[i]), pos(seq[i + 1]));
            return [
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                a[2] + t * (b[2] - a[2]),
            ];
        }
        target -= len;
    }
    seq.first().map(|&id| pos(id)).unwrap_or([0.0; 3])
}

struct Builder {
    nodes: Vec<ReducedNode>,
    edges: BTreeMap<(NodeId, NodeId), ReducedEdge>,
    next_id: NodeId,
}

impl Builder {
    fn add_edge(&mut self, u: NodeId, v: NodeId, length: f64, thickness: f64, path: Vec<NodeId>) {
        let k = if u < v { (u, v) } else { (v, u) };
        let path = if u < v { path } else { path.into_iter().rev().collect() };
        self.edges.insert(
            k,
            ReducedEdge {
                u: k.0,
                v: k.1,
                length,
                thickness,
                skeleton_path: path,
            },
        );
    }

    fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains_key(&if u < v { (u, v) } else { (v, u) })
    }

    fn new_mid(&mut self, position: [f64; 3], source_ids: Vec<NodeId>) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        self.nodes.push(ReducedNode {
            id,
            role: NodeRole::Mid,
            position,
            source_ids,
        });
        id
    }
}

/// Key-node breadth-first traversal.
///
/// The first simple path between two key nodes becomes a direct edge; each
/// further parallel path gets a mid node and two half-length edges; a loop
/// path gets two mid nodes and three third-length edges, or is dropped when
/// `cfg.preserve_loops` is off. Only `preserve_loops` is read from `cfg`.
pub fn reduce_graph(g: &SkeletonGraph, cfg: &ReduceConfig) -> ReducedGraph {
    if g.nodes().is_empty() {
        return ReducedGraph::empty(g.object_id(), g.object_type());
    }
    let walk = Walk::new(g);
    let paths = walk.paths();
    let topo = &walk.topo;
    let n = topo.len();
    let index_of = |id: NodeId| g.node_index(id).expect("path ends are graph nodes");

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (pi, p) in paths.iter().enumerate() {
        incident[index_of(p.src)].push(pi);
        if !p.is_loop() {
            incident[index_of(p.trg)].push(pi);
        }
    }
    // neighbor order: by the far end's id, then shortest first so the direct
    // edge of a parallel bundle is its shortest path
    for (i, list) in incident.iter_mut().enumerate() {
        let here = topo.ids[i];
        list.sort_by(|&a, &b| {
            let far = |p: &SimplePath| if p.src == here { p.trg } else { p.src };
            let (pa, pb) = (&paths[a], &paths[b]);
            far(pa)
                .cmp(&far(pb))
                .then(pa.length.total_cmp(&pb.length))
                .then(a.cmp(&b))
        });
    }

    let mut b = Builder {
        nodes: Vec::new(),
        edges: BTreeMap::new(),
        next_id: topo.ids.last().map_or(0, |&m| m + 1),
    };
    for i in 0..n {
        if !walk.is_key[i] {
            continue;
        }
        let node = &g.nodes()[i];
        let role = if walk.anchors.contains(&i) {
            NodeRole::Anchor
        } else if topo.degree(i) > 2 {
            NodeRole::Junction
        } else {
            NodeRole::Endpoint
        };
        b.nodes.push(ReducedNode {
            id: node.id,
            role,
            position: node.position,
            source_ids: vec![node.id],
        });
    }

    let mut visited = vec![false; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    for start in 0..n {
        if !walk.is_key[start] || queued[start] {
            continue;
        }
        queued[start] = true;
        queue.push_back(start);
        while let Some(s) = queue.pop_front() {
            visited[s] = true;
            let src = topo.ids[s];
            for &pi in &incident[s] {
                let p = &paths[pi];
                if p.is_loop() {
                    if cfg.preserve_loops {
                        let seq = p.sequence();
                        let half = p.interior.len() / 2;
                        let m1 = b.new_mid(point_along(g, &seq, 1.0 / 3.0), p.interior[..half].to_vec());
                        let m2 = b.new_mid(point_along(g, &seq, 2.0 / 3.0), p.interior[half..].to_vec());
                        let w = p.length / 3.0;
                        b.add_edge(src, m1, w, p.thickness, Vec::new());
                        b.add_edge(m1, m2, w, p.thickness, Vec::new());
                        b.add_edge(m2, src, w, p.thickness, Vec::new());
                    }
                    continue;
                }
                let (trg, seq) = if p.src == src {
                    (p.trg, p.sequence())
                } else {
                    let mut seq = p.sequence();
                    seq.reverse();
                    (p.src, seq)
                };
                let t = index_of(trg);
                if visited[t] {
                    continue;
                }
                if !b.has_edge(src, trg) {
                    b.add_edge(src, trg, p.length, p.thickness, seq);
                } else {
                    let mid = b.new_mid(point_along(g, &seq, 0.5), p.interior.clone());
                    let w = p.length / 2.0;
                    b.add_edge(src, mid, w, p.thickness, Vec::new());
                    b.add_edge(mid, trg, w, p.thickness, Vec::new());
                }
                if !queued[t] {
                    queued[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }

    ReducedGraph::new(
        g.object_id(),
        g.object_type(),
        b.nodes,
        b.edges.into_values().collect(),
    )
    .expect("traversal output is a simple graph")
}

// ---------------------------------------------------------------------------
// Path multigraph used by contraction and smoothing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Chain {
    u: NodeId,
    v: NodeId,
    length: f64,
    thickness: f64,
    skeleton_path: Vec<NodeId>,
    /// Dissolved nodes in order from `u` to `v`.
    mids: Vec<ReducedNode>,
}

impl Chain {
    fn is_loop(&self) -> bool {
        self.u == self.v
    }

    fn other(&self, x: NodeId) -> NodeId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    fn touches(&self, x: NodeId) -> bool {
        self.u == x || self.v == x
    }
}

struct PathMultigraph {
    object_id: String,
    object_type: ObjectType,
    nodes: BTreeMap<NodeId, ReducedNode>,
    chains: Vec<Chain>,
    next_id: NodeId,
}

impl PathMultigraph {
    /// Collapses every degree-2 node accepted by `dissolve` into the chain
    /// passing through it. Cycles made only of dissolvable nodes keep their
    /// smallest-id node, promoted to an anchor.
    fn collapse(gs: &ReducedGraph, dissolve: impl Fn(&ReducedNode) -> bool) -> Self {
        let topo = gs.topology();
        let n = topo.len();
        let mut keep: Vec<bool> = (0..n)
            .map(|i| topo.degree(i) != 2 || !dissolve(&gs.nodes()[i]))
            .collect();
        let mut nodes: BTreeMap<NodeId, ReducedNode> = BTreeMap::new();
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let edge_at = |a: usize, b: usize| {
            let (x, y) = (topo.ids[a], topo.ids[b]);
            let k = if x < y { (x, y) } else { (y, x) };
            let idx = gs
                .edges()
                .binary_search_by_key(&k, |e| (e.u, e.v))
                .expect("adjacency comes from the edge list");
            &gs.edges()[idx]
        };

        let mut chains = Vec::new();
        let walk_from = |k: usize, keep: &Vec<bool>, used: &mut BTreeSet<(usize, usize)>| {
            let mut out = Vec::new();
            for &first in &topo.adj[k] {
                if used.contains(&key(k, first)) {
                    continue;
                }
                let (mut prev, mut cur) = (k, first);
                let mut length = 0.0;
                let mut weighted = 0.0;
                let mut path: Vec<NodeId> = Vec::new();
                let mut mids = Vec::new();
                loop {
                    used.insert(key(prev, cur));
                    let e = edge_at(prev, cur);
                    length += e.length;
                    weighted += e.thickness * e.length;
                    let mut piece = e.skeleton_path.clone();
                    if e.u != topo.ids[prev] {
                        piece.reverse();
                    }
                    if path.last().is_some() && path.last() == piece.first() {
                        piece.remove(0);
                    }
                    path.extend(piece);
                    if keep[cur] {
                        break;
                    }
                    mids.push(gs.nodes()[cur].clone());
                    let next = *topo.adj[cur]
                        .iter()
                        .find(|&&x| x != prev)
                        .expect("dissolved nodes have degree 2");
                    prev = cur;
                    cur = next;
                }
                out.push(Chain {
                    u: topo.ids[k],
                    v: topo.ids[cur],
                    length,
                    thickness: if length > 0.0 { weighted / length } else { 0.0 },
                    skeleton_path: path,
                    mids,
                });
            }
            out
        };

        for k in 0..n {
            if keep[k] {
                nodes.insert(topo.ids[k], gs.nodes()[k].clone());
                chains.extend(walk_from(k, &keep, &mut used));
            }
        }
        for k in 0..n {
            if keep[k] || topo.adj[k].iter().all(|&x| used.contains(&key(k, x))) {
                continue;
            }
            keep[k] = true;
            let mut anchor = gs.nodes()[k].clone();
            anchor.role = NodeRole::Anchor;
            nodes.insert(anchor.id, anchor);
            chains.extend(walk_from(k, &keep, &mut used));
        }

        PathMultigraph {
            object_id: gs.object_id().to_string(),
            object_type: gs.object_type(),
            nodes,
            chains,
            next_id: gs.nodes().last().map_or(0, |n| n.id + 1),
        }
    }

    fn fresh_mid(&mut self, position: [f64; 3], source_ids: Vec<NodeId>) -> ReducedNode {
        let id = self.next_id;
        self.next_id += 1;
        ReducedNode {
            id,
            role: NodeRole::Mid,
            position,
            source_ids,
        }
    }

    /// Re-expands chains into a simple graph: the shortest chain of each
    /// parallel bundle is a direct edge, every other one gets one mid node,
    /// and loops get two.
    fn expand(mut self) -> ReducedGraph {
        let mut groups: BTreeMap<(NodeId, NodeId), Vec<Chain>> = BTreeMap::new();
        for c in std::mem::take(&mut self.chains) {
            let k = if c.u <= c.v { (c.u, c.v) } else { (c.v, c.u) };
            groups.entry(k).or_default().push(c);
        }
        let mut nodes: Vec<ReducedNode> = self.nodes.values().cloned().collect();
        let mut edges = Vec::new();
        for ((a, b), mut group) in groups {
            group.sort_by(|x, y| {
                x.length
                    .total_cmp(&y.length)
                    .then(x.mids.len().cmp(&y.mids.len()))
            });
            for (i, c) in group.into_iter().enumerate() {
                let needed = if a == b { 2 } else if i == 0 { 0 } else { 1 };
                let pa = self.nodes[&c.u].position;
                let pb = self.nodes[&c.v].position;
                let mids: Vec<ReducedNode> = if needed == 0 {
                    Vec::new()
                } else if c.mids.len() == needed {
                    c.mids.iter().map(|m| ReducedNode { role: NodeRole::Mid, ..m.clone() }).collect()
                } else {
                    let mut sources: Vec<NodeId> = if c.skeleton_path.len() > 2 {
                        c.skeleton_path[1..c.skeleton_path.len() - 1].to_vec()
                    } else {
                        c.mids.iter().flat_map(|m| m.source_ids.iter().copied()).collect()
                    };
                    sources.sort_unstable();
                    sources.dedup();
                    (1..=needed)
                        .map(|j| {
                            let t = j as f64 / (needed + 1) as f64;
                            let pos = match c.mids.get(j - 1) {
                                Some(m) => m.position,
                                None => [
                                    pa[0] + t * (pb[0] - pa[0]),
                                    pa[1] + t * (pb[1] - pa[1]),
                                    pa[2] + t * (pb[2] - pa[2]),
                                ],
                            };
                            self.fresh_mid(pos, sources.clone())
                        })
                        .collect()
                };
                if mids.is_empty() {
                    edges.push(ReducedEdge {
                        u: c.u,
                        v: c.v,
                        length: c.length,
                        thickness: c.thickness,
                        skeleton_path: c.skeleton_path,
                    });
                    continue;
                }
                let w = c.length / (mids.len() + 1) as f64;
                let mut prev = c.u;
                for m in &mids {
                    edges.push(ReducedEdge {
                        u: prev,
                        v: m.id,
                        length: w,
                        thickness: c.thickness,
                        skeleton_path: Vec::new(),
                    });
                    prev = m.id;
                }
                edges.push(ReducedEdge {
                    u: prev,
                    v: c.v,
                    length: w,
                    thickness: c.thickness,
                    skeleton_path: Vec::new(),
                });
                nodes.extend(mids);
            }
        }
        ReducedGraph::new(self.object_id, self.object_type, nodes, edges)
            .expect("re-expanded path multigraph is simple")
    }
}

fn merge_chains(group: Vec<Chain>) -> Chain {
    let total: f64 = group.iter().map(|c| c.length).sum();
    let weighted: f64 = group.iter().map(|c| c.thickness * c.length).sum();
    let mut best = group
        .into_iter()
        .min_by(|a, b| a.length.total_cmp(&b.length))
        .expect("non-empty group");
    best.thickness = if total > 0.0 { weighted / total } else { 0.0 };
    best
}

/// Contracts the shortest edge shorter than `tau` until none remains.
///
/// Lengths are judged on the path multigraph (a mid-split path counts with
/// its full length). Contraction keeps the smaller id; the merged node is a
/// junction if either end was one. Edges that the contraction makes parallel
/// are merged (minimum length, length-weighted thickness), and so are loops
/// it creates at the same time. A loop shorter than `tau` is deleted.
pub fn contract_short_edges(gs: &ReducedGraph, tau: f64) -> ReducedGraph {
    let mut m = PathMultigraph::collapse(gs, |n| n.role == NodeRole::Mid);
    if !m.chains.iter().any(|c| c.length < tau) {
        return gs.clone();
    }
    loop {
        let pick = m
            .chains
            .iter()
            .enumerate()
            .filter(|(_, c)| c.length < tau)
            .min_by(|(i, a), (j, b)| {
                let ka = (a.u.min(a.v), a.u.max(a.v));
                let kb = (b.u.min(b.v), b.u.max(b.v));
                a.length.total_cmp(&b.length).then(ka.cmp(&kb)).then(i.cmp(j))
            })
            .map(|(i, _)| i);
        let Some(pick) = pick else { break };
        let chosen = m.chains.remove(pick);
        if chosen.is_loop() {
            continue;
        }
        let (keep, gone) = (chosen.u.min(chosen.v), chosen.u.max(chosen.v));
        let side_len = |x: NodeId| -> f64 {
            m.chains.iter().filter(|c| c.touches(x)).map(|c| c.length).sum()
        };
        let (wk, wg) = (side_len(keep), side_len(gone));
        let kn = m.nodes.remove(&keep).expect("chain end exists");
        let gn = m.nodes.remove(&gone).expect("chain end exists");
        let position = if wk + wg > 0.0 {
            std::array::from_fn(|i| (wk * kn.position[i] + wg * gn.position[i]) / (wk + wg))
        } else {
            std::array::from_fn(|i| (kn.position[i] + gn.position[i]) / 2.0)
        };
        let mut source_ids: Vec<NodeId> = kn.source_ids.iter().chain(&gn.source_ids).copied().collect();
        source_ids.sort_unstable();
        source_ids.dedup();
        let role = if kn.role == NodeRole::Junction || gn.role == NodeRole::Junction {
            NodeRole::Junction
        } else {
            kn.role
        };
        m.nodes.insert(
            keep,
            ReducedNode {
                id: keep,
                role,
                position,
                source_ids,
            },
        );

        // Side of each chain at the merged node before relabeling:
        // 0 = from `keep`, 1 = from `gone`, 2 = former keep-gone parallel (now a loop).
        let mut untouched = Vec::new();
        let mut sided: Vec<(u8, Chain)> = Vec::new();
        for mut c in std::mem::take(&mut m.chains) {
            let from_keep = c.touches(keep);
            let from_gone = c.touches(gone);
            if !from_keep && !from_gone {
                untouched.push(c);
                continue;
            }
            let side = match (from_keep, from_gone) {
                (true, true) => 2,
                (true, false) => 0,
                _ => 1,
            };
            if c.u == gone {
                c.u = keep;
            }
            if c.v == gone {
                c.v = keep;
            }
            let side = if c.is_loop() && side != 2 { 3 } else { side };
            sided.push((side, c));
        }
        m.chains = untouched;
        let mut bundles: BTreeMap<NodeId, Vec<(u8, Chain)>> = BTreeMap::new();
        for (side, c) in sided {
            bundles.entry(c.other(keep)).or_default().push((side, c));
        }
        for (far, bundle) in bundles {
            if far == keep {
                // new loops merge together; pre-existing loops stay
                let (fresh, old): (Vec<_>, Vec<_>) = bundle.into_iter().partition(|(s, _)| *s == 2);
                m.chains.extend(old.into_iter().map(|(_, c)| c));
                if !fresh.is_empty() {
                    m.chains.push(merge_chains(fresh.into_iter().map(|(_, c)| c).collect()));
                }
                continue;
            }
            let both_sides = bundle.iter().any(|(s, _)| *s == 0) && bundle.iter().any(|(s, _)| *s == 1);
            if both_sides {
                m.chains.push(merge_chains(bundle.into_iter().map(|(_, c)| c).collect()));
            } else {
                m.chains.extend(bundle.into_iter().map(|(_, c)| c));
            }
        }
    }
    m.expand()
}

/// Removes every degree-2 node that is neither a mid nor an anchor, fusing
/// its two edges (lengths summed, thickness length-weighted).
pub fn smooth_degree2(gs: &ReducedGraph) -> ReducedGraph {
    let topo = gs.topology();
    let any = gs.nodes().iter().enumerate().any(|(i, n)| {
        topo.degree(i) == 2 && !matches!(n.role, NodeRole::Mid | NodeRole::Anchor)
    });
    if !any {
        return gs.clone();
    }
    PathMultigraph::collapse(gs, |n| n.role != NodeRole::Anchor).expand()
}

/// Traversal, then contraction, then optional smoothing.
pub fn reduce_pipeline(g: &SkeletonGraph, cfg: &ReduceConfig) -> ReducedGraph {
    let gs = reduce_graph(g, cfg);
    let tau = match cfg.tau_mode {
        TauMode::Absolute => cfg.tau,
        TauMode::Relative => cfg.tau * gs.total_length(),
    };
    let gs = contract_short_edges(&gs, tau);
    if cfg.smooth_degree2 {
        smooth_degree2(&gs)
    } else {
        gs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{components_and_cycle_rank, SkeletonNode};

    /// Builds a skeleton from chains of given edge lengths between named
    /// key nodes. Interior nodes get fresh ids starting at 100.
    struct Fixture {
        nodes: Vec<SkeletonNode>,
        edges: Vec<SkeletonEdge>,
        next: NodeId,
    }

    impl Fixture {
        fn new(keys: &[NodeId]) -> Self {
            let nodes = keys
                .iter()
                .map(|&id| SkeletonNode {
                    id,
                    position: [id as f64, 0.0, 0.0],
                    radius: 1.0,
                })
                .collect();
            Fixture {
                nodes,
                edges: Vec::new(),
                next: 100,
            }
        }

        /// Chain from `a` to `b` made of edges with the given lengths.
        fn chain(mut self, a: NodeId, b: NodeId, lens: &[f64]) -> Self {
            let mut prev = a;
            for (i, &l) in lens.iter().enumerate() {
                let to = if i + 1 == lens.len() {
                    b
                } else {
                    let id = self.next;
                    self.next += 1;
                    self.nodes.push(SkeletonNode {
                        id,
                        position: [0.0, id as f64, 0.0],
                        radius: 1.0,
                    });
                    id
                };
                self.edges.push(SkeletonEdge { u: prev, v: to, length: l });
                prev = to;
            }
            self
        }

        fn build(self) -> SkeletonGraph {
            SkeletonGraph::new("fx", ObjectType::Mitochondrion, self.nodes, self.edges).unwrap()
        }
    }

    fn lengths(gs: &ReducedGraph) -> Vec<f64> {
        let mut l: Vec<f64> = gs.edges().iter().map(|e| e.length).collect();
        l.sort_by(f64::total_cmp);
        l
    }

    fn roles(gs: &ReducedGraph, role: NodeRole) -> usize {
        gs.nodes().iter().filter(|n| n.role == role).count()
    }

    fn theta(lens: [f64; 3]) -> SkeletonGraph {
        // each chain split into 3 equal edges
        Fixture::new(&[0, 1])
            .chain(0, 1, &[lens[0] / 3.0; 3])
            .chain(0, 1, &[lens[1] / 3.0; 3])
            .chain(0, 1, &[lens[2] / 3.0; 3])
            .build()
    }

    #[test]
    fn classify_examples() {
        let path = Fixture::new(&[0, 2]).chain(0, 2, &[1.0, 1.0]).build();
        let k = classify_key_nodes(&path);
        assert!(k.junctions.is_empty());
        assert_eq!(k.endpoints, BTreeSet::from([0, 2]));

        let star = Fixture::new(&[0, 1, 2, 3])
            .chain(0, 1, &[1.0, 1.0])
            .chain(0, 2, &[1.0, 1.0])
            .chain(0, 3, &[1.0, 1.0])
            .build();
        let k = classify_key_nodes(&star);
        assert_eq!(k.junctions, BTreeSet::from([0]));
        assert_eq!(k.endpoints, BTreeSet::from([1, 2, 3]));

        let cycle = Fixture::new(&[0]).chain(0, 0, &[1.0; 6]).build();
        assert_eq!(classify_key_nodes(&cycle), KeyNodes::default());
    }

    #[test]
    fn thickness_examples() {
        let nodes = vec![
            SkeletonNode { id: 0, position: [0.0; 3], radius: 2.0 },
            SkeletonNode { id: 1, position: [1.0, 0.0, 0.0], radius: 4.0 },
            SkeletonNode { id: 2, position: [2.0, 0.0, 0.0], radius: 0.0 },
            SkeletonNode { id: 3, position: [3.0, 0.0, 0.0], radius: 0.0 },
        ];
        let edges = vec![
            SkeletonEdge { u: 0, v: 1, length: 1.0 },
            SkeletonEdge { u: 2, v: 3, length: 1.0 },
        ];
        let g = SkeletonGraph::new("t", ObjectType::Other, nodes, edges).unwrap();
        assert_eq!(edge_thickness(&g, &g.edges()[0]).unwrap(), 3.0);
        assert_eq!(edge_thickness(&g, &g.edges()[1]).unwrap(), 0.0);
        let missing = SkeletonEdge { u: 1, v: 2, length: 1.0 };
        assert_eq!(edge_thickness(&g, &missing), Err(GraphError::UnknownEdge(1, 2)));

        let defaulted = Fixture::new(&[0, 1]).chain(0, 1, &[2.0]).build();
        assert_eq!(edge_thickness(&defaulted, &defaulted.edges()[0]).unwrap(), 1.0);
    }

    #[test]
    fn simple_path_examples() {
        let path = Fixture::new(&[0, 4]).chain(0, 4, &[1.0, 2.0, 3.0, 4.0]).build();
        let paths = enumerate_simple_paths(&path);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].interior.len(), 3);
        assert_eq!(paths[0].length, 10.0);

        let paths = enumerate_simple_paths(&theta([3.0, 4.0, 5.0]));
        assert_eq!(paths.len(), 3);
        assert!(paths.iter().all(|p| (p.src.min(p.trg), p.src.max(p.trg)) == (0, 1)));

        let tadpole = Fixture::new(&[0, 1])
            .chain(0, 0, &[1.0, 1.0, 1.0, 1.0])
            .chain(0, 1, &[1.0, 1.0])
            .build();
        let paths = enumerate_simple_paths(&tadpole);
        assert_eq!(paths.len(), 2);
        assert_eq!(paths.iter().filter(|p| p.is_loop()).count(), 1);
        assert!(paths.iter().any(|p| !p.is_loop() && p.trg == 1));
    }

    #[test]
    fn path_thickness_is_length_weighted() {
        let nodes = vec![
            SkeletonNode { id: 0, position: [0.0; 3], radius: 1.0 },
            SkeletonNode { id: 1, position: [0.0; 3], radius: 3.0 },
            SkeletonNode { id: 2, position: [0.0; 3], radius: 3.0 },
        ];
        let edges = vec![
            SkeletonEdge { u: 0, v: 1, length: 1.0 },
            SkeletonEdge { u: 1, v: 2, length: 3.0 },
        ];
        let g = SkeletonGraph::new("t", ObjectType::Other, nodes, edges).unwrap();
        let p = &enumerate_simple_paths(&g)[0];
        // (2*1 + 3*3) / 4
        assert!((p.thickness - 11.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn reduce_path() {
        let g = Fixture::new(&[0, 2]).chain(0, 2, &[1.5, 2.5]).build();
        let gs = reduce_graph(&g, &ReduceConfig::exact());
        assert_eq!(roles(&gs, NodeRole::Endpoint), 2);
        assert_eq!(lengths(&gs), vec![4.0]);
        assert_eq!(gs.edges()[0].skeleton_path, vec![0, 100, 2]);
    }

    #[test]
    fn reduce_theta() {
        let g = theta([3.0, 4.0, 5.0]);
        let gs = reduce_graph(&g, &ReduceConfig::exact());
        assert_eq!(roles(&gs, NodeRole::Junction), 2);
        assert_eq!(roles(&gs, NodeRole::Mid), 2);
        let l = lengths(&gs);
        let want = [2.0, 2.0, 2.5, 2.5, 3.0];
        assert!(l.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12), "{l:?}");
        assert_eq!(components_and_cycle_rank(&gs), (1, 2));
    }

    #[test]
    fn reduce_pure_cycle() {
        let g = Fixture::new(&[0]).chain(0, 0, &[2.0; 6]).build();
        let gs = reduce_graph(&g, &ReduceConfig::exact());
        assert_eq!(roles(&gs, NodeRole::Anchor), 1);
        assert_eq!(roles(&gs, NodeRole::Mid), 2);
        assert_eq!(lengths(&gs), vec![4.0, 4.0, 4.0]);
        assert_eq!(components_and_cycle_rank(&gs), (1, 1));

        let mut cfg = ReduceConfig::exact();
        cfg.preserve_loops = false;
        let gs = reduce_graph(&g, &cfg);
        assert_eq!(gs.nodes().len(), 1);
        assert!(gs.edges().is_empty());
    }

    #[test]
    fn reduce_empty_and_isolated() {
        let g = SkeletonGraph::new("e", ObjectType::Other, vec![], vec![]).unwrap();
        assert!(reduce_graph(&g, &ReduceConfig::exact()).nodes().is_empty());
        let g = Fixture::new(&[7]).build();
        let gs = reduce_graph(&g, &ReduceConfig::exact());
        assert_eq!(gs.nodes().len(), 1);
        assert_eq!(gs.nodes()[0].role, NodeRole::Endpoint);
    }

    #[test]
    fn contraction_examples() {
        let theta_gs = reduce_graph(&theta([3.0, 4.0, 5.0]), &ReduceConfig::exact());
        assert_eq!(contract_short_edges(&theta_gs, 0.0), theta_gs);

        let single = reduce_graph(&Fixture::new(&[0, 1]).chain(0, 1, &[3.0]).build(), &ReduceConfig::exact());
        let c = contract_short_edges(&single, 4.0);
        assert_eq!(c.nodes().len(), 1);
        assert!(c.edges().is_empty());

        let y = Fixture::new(&[0, 1, 2, 3])
            .chain(0, 1, &[1.0])
            .chain(0, 2, &[5.0, 5.0])
            .chain(0, 3, &[5.0, 5.0])
            .build();
        let gs = reduce_graph(&y, &ReduceConfig::exact());
        let c = contract_short_edges(&gs, 4.0);
        assert_eq!(c.nodes().len(), 3);
        assert_eq!(c.node(0).unwrap().role, NodeRole::Junction);
        assert_eq!(c.node(0).unwrap().source_ids, vec![0, 1]);
        assert_eq!(lengths(&c), vec![10.0, 10.0]);
        let s = smooth_degree2(&c);
        assert_eq!(s.nodes().len(), 2);
        assert_eq!(lengths(&s), vec![20.0]);
    }

    #[test]
    fn contraction_is_idempotent_on_theta() {
        let gs = reduce_graph(&theta([3.0, 4.0, 5.0]), &ReduceConfig::exact());
        let once = contract_short_edges(&gs, 4.0);
        assert_eq!(contract_short_edges(&once, 4.0), once);
    }

    #[test]
    fn pipeline_theta_collapses_to_one_loop() {
        let cfg = ReduceConfig {
            tau: 4.0,
            ..ReduceConfig::default()
        };
        let out = reduce_pipeline(&theta([3.0, 4.0, 5.0]), &cfg);
        assert_eq!(components_and_cycle_rank(&out), (1, 1));
        assert_eq!(lengths(&out).len(), 3);
        assert!((out.total_length() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn smoothing_examples() {
        let node = |id, role| ReducedNode {
            id,
            role,
            position: [id as f64, 0.0, 0.0],
            source_ids: vec![id],
        };
        let edge = |u, v, length| ReducedEdge {
            u,
            v,
            length,
            thickness: 1.0,
            skeleton_path: vec![],
        };
        let path = ReducedGraph::new(
            "p",
            ObjectType::Other,
            vec![node(0, NodeRole::Endpoint), node(1, NodeRole::Junction), node(2, NodeRole::Endpoint)],
            vec![edge(0, 1, 5.0), edge(1, 2, 7.0)],
        )
        .unwrap();
        let s = smooth_degree2(&path);
        assert_eq!(s.nodes().len(), 2);
        assert_eq!(lengths(&s), vec![12.0]);

        let clean = reduce_graph(&theta([3.0, 4.0, 5.0]), &ReduceConfig::exact());
        assert_eq!(smooth_degree2(&clean), clean);

        let tri = ReducedGraph::new(
            "t",
            ObjectType::Other,
            vec![node(0, NodeRole::Junction), node(1, NodeRole::Junction), node(2, NodeRole::Junction)],
            vec![edge(0, 1, 1.0), edge(1, 2, 2.0), edge(0, 2, 3.0)],
        )
        .unwrap();
        let s = smooth_degree2(&tri);
        assert_eq!(roles(&s, NodeRole::Anchor), 1);
        assert_eq!(roles(&s, NodeRole::Mid), 2);
        assert!((s.total_length() - 6.0).abs() < 1e-12);
        assert_eq!(components_and_cycle_rank(&s), (1, 1));
    }

    #[test]
    fn relative_tau_scales_with_total_length() {
        let y = Fixture::new(&[0, 1, 2, 3])
            .chain(0, 1, &[1.0])
            .chain(0, 2, &[5.0, 5.0])
            .chain(0, 3, &[5.0, 5.0])
            .build();
        let cfg = ReduceConfig {
            tau: 0.1,
            tau_mode: TauMode::Relative,
            ..ReduceConfig::default()
        };
        // threshold 2.1 removes the unit arm only
        let out = reduce_pipeline(&y, &cfg);
        assert_eq!(lengths(&out), vec![20.0]);
    }
}
