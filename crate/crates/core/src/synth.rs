//! Seeded synthetic skeletons and exhaustive oracles.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{GraphView, ObjectType, SkeletonEdge, SkeletonGraph, SkeletonNode, Topology};
use crate::matching::CostMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("input too large for exhaustive search ({n} > {max})")]
    TooLarge { n: usize, max: usize },
    #[error("graph contains a cycle")]
    HasCycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Tree,
    Path,
    Star,
    Cycle,
    Theta,
    Tadpole,
    Bicyclic,
    Spiro,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Tree,
        Kind::Path,
        Kind::Star,
        Kind::Cycle,
        Kind::Theta,
        Kind::Tadpole,
        Kind::Bicyclic,
        Kind::Spiro,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Tree => "tree",
            Kind::Path => "path",
            Kind::Star => "star",
            Kind::Cycle => "cycle",
            Kind::Theta => "theta",
            Kind::Tadpole => "tadpole",
            Kind::Bicyclic => "bicyclic",
            Kind::Spiro => "spiro",
        }
    }

    /// Smallest node count the kind can be built with.
    pub fn min_nodes(self) -> usize {
        match self {
            Kind::Tree | Kind::Path => 1,
            Kind::Star => 2,
            Kind::Cycle => 3,
            Kind::Theta | Kind::Tadpole => 4,
            Kind::Spiro => 5,
            Kind::Bicyclic => 6,
        }
    }
}

impl FromStr for Kind {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| SynthError::InvalidSpec(format!("unknown kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: Kind,
    pub n: usize,
    pub seed: u64,
    pub length_range: (f64, f64),
    pub radius_range: (f64, f64),
}

impl SynthSpec {
    pub fn new(kind: Kind, n: usize, seed: u64) -> Self {
        SynthSpec {
            kind,
            n,
            seed,
            length_range: (1.0, 3.0),
            radius_range: (0.5, 2.0),
        }
    }
}

/// Uniform random labeled tree on `n` vertices from a Prüfer sequence.
pub fn prufer_tree(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Splits `total` into `parts` non-negative counts at random.
fn split(total: usize, parts: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut out = vec![0; parts];
    for _ in 0..total {
        out[rng.random_range(0..parts)] += 1;
    }
    out
}

/// Connects `a` to `b` through `interior` fresh vertices.
fn chain(edges: &mut Vec<(usize, usize)>, next: &mut usize, a: usize, b: usize, interior: usize) {
    let mut prev = a;
    for _ in 0..interior {
        edges.push((prev, *next));
        prev = *next;
        *next += 1;
    }
    edges.push((prev, b));
}

/// Ring through `s` with `interior` further vertices.
fn ring(edges: &mut Vec<(usize, usize)>, next: &mut usize, s: usize, interior: usize) {
    chain(edges, next, s, s, interior);
}

fn topology_edges(kind: Kind, n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    match kind {
        Kind::Path => {
            for i in 1..n {
                edges.push((i - 1, i));
            }
        }
        Kind::Star => {
            for i in 1..n {
                edges.push((0, i));
            }
        }
        Kind::Tree => {
            let base = if n < 2 { n } else { n.div_ceil(3).max(2) };
            let tree = prufer_tree(base, rng);
            let mut next = base;
            let extra = split(n - base, tree.len().max(1), rng);
            for (e, (a, b)) in tree.into_iter().enumerate() {
                chain(&mut edges, &mut next, a, b, extra[e]);
            }
        }
        Kind::Cycle => {
            let mut next = 1;
            ring(&mut edges, &mut next, 0, n - 1);
        }
        Kind::Theta => {
            // at most one bridge may be empty
            let mut parts = split(n - 4, 3, rng);
            parts[0] += 1;
            parts[1] += 1;
            parts.shuffle(rng);
            let mut next = 2;
            for p in parts {
                chain(&mut edges, &mut next, 0, 1, p);
            }
        }
        Kind::Tadpole => {
            let cycle = rng.random_range(3..n);
            let mut next = 1;
            ring(&mut edges, &mut next, 0, cycle - 1);
            chain(&mut edges, &mut next, 0, n - 1, n - cycle - 1);
        }
        Kind::Bicyclic => {
            let p = split(n - 6, 3, rng);
            let (a, b) = (0, 1);
            let mut next = 2;
            ring(&mut edges, &mut next, a, 2 + p[0]);
            ring(&mut edges, &mut next, b, 2 + p[1]);
            chain(&mut edges, &mut next, a, b, p[2]);
        }
        Kind::Spiro => {
            let p = split(n - 5, 2, rng);
            let mut next = 1;
            ring(&mut edges, &mut next, 0, 2 + p[0]);
            ring(&mut edges, &mut next, 0, 2 + p[1]);
        }
    }
    edges
}

/// Builds a skeleton of the requested class. Node ids are shuffled so that
/// structure never correlates with id order.
pub fn generate(spec: &SynthSpec) -> Result<SkeletonGraph, SynthError> {
    let (lo, hi) = spec.length_range;
    let (rlo, rhi) = spec.radius_range;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(SynthError::InvalidSpec(format!("length range ({lo}, {hi})")));
    }
    if !(rlo >= 0.0 && rlo <= rhi && rhi.is_finite()) {
        return Err(SynthError::InvalidSpec(format!("radius range ({rlo}, {rhi})")));
    }
    if spec.n < spec.kind.min_nodes() {
        return Err(SynthError::InvalidSpec(format!(
            "{} needs at least {} nodes, got {}",
            spec.kind.as_str(),
            spec.kind.min_nodes(),
            spec.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let edges = topology_edges(spec.kind, spec.n, &mut rng);
    let mut ids: Vec<u64> = (0..spec.n as u64).collect();
    ids.shuffle(&mut rng);
    let nodes = ids
        .iter()
        .map(|&id| SkeletonNode {
            id,
            position: [
                rng.random_range(0.0..100.0),
                rng.random_range(0.0..100.0),
                rng.random_range(0.0..100.0),
            ],
            radius: rng.random_range(rlo..=rhi),
        })
        .collect();
    let edges = edges
        .into_iter()
        .map(|(a, b)| SkeletonEdge {
            u: ids[a],
            v: ids[b],
            length: rng.random_range(lo..=hi),
        })
        .collect();
    let id = format!("{}-{}-{}", spec.kind.as_str(), spec.n, spec.seed);
    SkeletonGraph::new(id, ObjectType::Other, nodes, edges).map_err(|e| SynthError::InvalidSpec(e.to_string()))
}

/// Unit-length random tree with ids `0..n`.
pub fn random_tree(n: usize, seed: u64) -> SkeletonGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    unit_graph(format!("tree-{n}-{seed}"), n, &prufer_tree(n, &mut rng))
}

/// Unit-length graph with at least one cycle: a random ring system with
/// random trees hanging off it, `n` vertices in total.
pub fn random_cyclic(n: usize, seed: u64) -> SkeletonGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds: Vec<Kind> = [Kind::Cycle, Kind::Theta, Kind::Spiro, Kind::Bicyclic]
        .into_iter()
        .filter(|k| k.min_nodes() <= n.max(3))
        .collect();
    let kind = kinds[rng.random_range(0..kinds.len())];
    let core = rng.random_range(kind.min_nodes()..=n.max(kind.min_nodes()));
    let mut edges = topology_edges(kind, core, &mut rng);
    for v in core..n.max(core) {
        let parent = rng.random_range(0..v);
        edges.push((parent, v));
    }
    unit_graph(format!("cyclic-{n}-{seed}"), n.max(core), &edges)
}

/// Unit-length graph on ids `0..n`.
pub fn unit_graph(id: String, n: usize, edges: &[(usize, usize)]) -> SkeletonGraph {
    let nodes = (0..n)
        .map(|i| SkeletonNode {
            id: i as u64,
            position: [i as f64, 0.0, 0.0],
            radius: 1.0,
        })
        .collect();
    let edges = edges
        .iter()
        .map(|&(a, b)| SkeletonEdge {
            u: a as u64,
            v: b as u64,
            length: 1.0,
        })
        .collect();
    SkeletonGraph::new(id, ObjectType::Other, nodes, edges).expect("generated graphs are simple")
}

/// Copy of `g` under a seeded random relabeling onto fresh ids.
pub fn relabel(g: &SkeletonGraph, seed: u64) -> SkeletonGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fresh: Vec<u64> = (0..g.nodes().len() as u64).map(|i| i * 7 + 3).collect();
    fresh.shuffle(&mut rng);
    let map = |id: u64| fresh[g.node_index(id).expect("own node")];
    let nodes = g
        .nodes()
        .iter()
        .map(|n| SkeletonNode { id: map(n.id), ..n.clone() })
        .collect();
    let edges = g
        .edges()
        .iter()
        .map(|e| SkeletonEdge {
            u: map(e.u),
            v: map(e.v),
            length: e.length,
        })
        .collect();
    SkeletonGraph::new(g.object_id(), g.object_type(), nodes, edges).expect("relabeling keeps validity")
}

const MAX_PATH_NODES: usize = 12;
const MAX_ASSIGN: usize = 7;
const MAX_ISO: usize = 8;

/// Largest vertex count over all simple paths, by exhaustive search.
pub fn brute_longest_path<G: GraphView + ?Sized>(t: &G) -> Result<usize, SynthError> {
    let topo = t.topology();
    let n = topo.len();
    if n > MAX_PATH_NODES {
        return Err(SynthError::TooLarge { n, max: MAX_PATH_NODES });
    }
    if topo.edge_count() + topo.component_labels().1 != n {
        return Err(SynthError::HasCycle);
    }
    fn dfs(topo: &Topology, v: usize, seen: &mut Vec<bool>, depth: usize, best: &mut usize) {
        *best = (*best).max(depth);
        for &x in &topo.adj[v] {
            if !seen[x] {
                seen[x] = true;
                dfs(topo, x, seen, depth + 1, best);
                seen[x] = false;
            }
        }
    }
    let mut best = 0;
    for s in 0..n {
        let mut seen = vec![false; n];
        seen[s] = true;
        dfs(&topo, s, &mut seen, 1, &mut best);
    }
    Ok(best)
}

fn permutations(n: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    fn rec(perm: &mut Vec<usize>, used: &mut Vec<bool>, n: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if perm.len() == n {
            return visit(perm);
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                perm.push(i);
                let stop = rec(perm, used, n, visit);
                perm.pop();
                used[i] = false;
                if stop {
                    return true;
                }
            }
        }
        false
    }
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], n, &mut visit);
}

/// Minimum assignment cost over all permutations of a square matrix.
pub fn brute_assignment(c: &CostMatrix) -> Result<f64, SynthError> {
    let n = c.rows();
    if c.cols() != n {
        return Err(SynthError::InvalidSpec("matrix must be square".into()));
    }
    if n > MAX_ASSIGN {
        return Err(SynthError::TooLarge { n, max: MAX_ASSIGN });
    }
    let mut best = f64::INFINITY;
    permutations(n, |p| {
        let mut costs: Vec<f64> = p.iter().enumerate().map(|(i, &j)| c.get(i, j)).collect();
        costs.sort_by(f64::total_cmp);
        best = best.min(costs.iter().sum());
        false
    });
    Ok(if n == 0 { 0.0 } else { best })
}

/// Whether two graphs have the same unlabeled topology, by trying every
/// vertex bijection.
pub fn brute_isomorphic<A: GraphView + ?Sized, B: GraphView + ?Sized>(g1: &A, g2: &B) -> Result<bool, SynthError> {
    let (a, b) = (g1.topology(), g2.topology());
    let n = a.len();
    if n.max(b.len()) > MAX_ISO {
        return Err(SynthError::TooLarge {
            n: n.max(b.len()),
            max: MAX_ISO,
        });
    }
    if n != b.len() || a.edge_count() != b.edge_count() {
        return Ok(false);
    }
    let mut deg_a: Vec<usize> = a.adj.iter().map(Vec::len).collect();
    let mut deg_b: Vec<usize> = b.adj.iter().map(Vec::len).collect();
    deg_a.sort_unstable();
    deg_b.sort_unstable();
    if deg_a != deg_b {
        return Ok(false);
    }
    let mut found = false;
    permutations(n, |p| {
        found = (0..n).all(|i| a.adj[i].iter().all(|&j| b.adj[p[i]].contains(&p[j])));
        found
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::components_and_cycle_rank;
    use crate::reduce::classify_key_nodes;

    #[test]
    fn kinds_have_expected_shape() {
        let path = generate(&SynthSpec::new(Kind::Path, 5, 0)).unwrap();
        assert_eq!(components_and_cycle_rank(&path), (1, 0));
        let theta = generate(&SynthSpec::new(Kind::Theta, 10, 0)).unwrap();
        assert_eq!(components_and_cycle_rank(&theta), (1, 2));
        assert_eq!(classify_key_nodes(&theta).junctions.len(), 2);
        for kind in Kind::ALL {
            for n in kind.min_nodes()..kind.min_nodes() + 12 {
                let g = generate(&SynthSpec::new(kind, n, n as u64)).unwrap();
                assert_eq!(g.nodes().len(), n, "{kind:?}");
                assert_eq!(components_and_cycle_rank(&g).0, 1, "{kind:?}");
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SynthSpec::new(Kind::Tree, 40, 3);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            generate(&SynthSpec::new(Kind::Cycle, 2, 0)),
            Err(SynthError::InvalidSpec(_))
        ));
        let mut spec = SynthSpec::new(Kind::Path, 3, 0);
        spec.length_range = (3.0, 1.0);
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn oracles() {
        let path = generate(&SynthSpec::new(Kind::Path, 5, 0)).unwrap();
        assert_eq!(brute_longest_path(&path).unwrap(), 5);
        let star = generate(&SynthSpec::new(Kind::Star, 5, 0)).unwrap();
        assert_eq!(brute_longest_path(&star).unwrap(), 3);
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(brute_assignment(&c).unwrap(), 2.0);
        let p4 = unit_graph("p".into(), 4, &[(0, 1), (1, 2), (2, 3)]);
        let s4 = unit_graph("s".into(), 4, &[(0, 1), (0, 2), (0, 3)]);
        assert!(!brute_isomorphic(&p4, &s4).unwrap());
        assert!(brute_isomorphic(&p4, &relabel(&p4, 5)).unwrap());
        let cyc = generate(&SynthSpec::new(Kind::Cycle, 4, 0)).unwrap();
        assert_eq!(brute_longest_path(&cyc), Err(SynthError::HasCycle));
    }
}
