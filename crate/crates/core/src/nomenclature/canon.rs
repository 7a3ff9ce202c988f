//! Canonical naming of one connected component.
//!
//! Every admissible numbering is rendered and the smallest string (under
//! [`natural_cmp`]) wins. The candidate set for each core kind depends only
//! on the unlabeled structure, so the result is invariant under relabeling.
//!
//! Trees use every longest path in both directions as the main chain. Ring
//! systems are the 2-core of the component; trees hanging off it become
//! branches. Hanging trees are described from their attachment vertex, so a
//! branch descriptor's chain always starts at position 1.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::ast::{natural_cmp, render, render_descriptor, Core, NameAst, Suffix};

pub(crate) type Adjacency = [Vec<usize>];

struct Namer<'a> {
    adj: &'a Adjacency,
    /// Descriptor of the subtree entered through `(root, parent)`.
    rooted_memo: HashMap<(usize, usize), (NameAst, String)>,
}

fn bfs_from(adj: &Adjacency, src: usize, blocked: Option<usize>) -> (Vec<usize>, Vec<usize>) {
    let n = adj.len();
    let mut depth = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    depth[src] = 0;
    if let Some(b) = blocked {
        depth[b] = usize::MAX - 1;
    }
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    if let Some(b) = blocked {
        depth[b] = usize::MAX;
    }
    (depth, parent)
}

fn trace(parent: &[usize], src: usize, dst: usize) -> Vec<usize> {
    let mut path = vec![dst];
    let mut cur = dst;
    while cur != src {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

fn pick_min(cands: impl IntoIterator<Item = (NameAst, String)>) -> (NameAst, String) {
    cands
        .into_iter()
        .min_by(|a, b| natural_cmp(&a.1, &b.1))
        .expect("at least one numbering")
}

impl<'a> Namer<'a> {
    fn new(adj: &'a Adjacency) -> Self {
        Namer {
            adj,
            rooted_memo: HashMap::new(),
        }
    }

    /// Branch descriptor for the tree hanging off `parent` through `root`.
    fn rooted(&mut self, root: usize, parent: usize) -> (NameAst, String) {
        if let Some(hit) = self.rooted_memo.get(&(root, parent)) {
            return hit.clone();
        }
        let (depth, par) = bfs_from(self.adj, root, Some(parent));
        let deepest = depth.iter().filter(|&&d| d != usize::MAX).max().copied().unwrap_or(0);
        let leaves: Vec<usize> = (0..self.adj.len()).filter(|&v| depth[v] == deepest).collect();
        let mut cands = Vec::with_capacity(leaves.len());
        for leaf in leaves {
            let path = trace(&par, root, leaf);
            let atts = self.attachments(&path, |v, i| {
                if i == 0 {
                    Some(parent) == Some(v)
                } else {
                    false
                }
            });
            let ast = NameAst::from_attachments(Core::Chain(path.len()), atts, None);
            let text = render_descriptor(&ast);
            cands.push((ast, text));
        }
        let best = pick_min(cands);
        self.rooted_memo.insert((root, parent), best.clone());
        best
    }

    /// Branches hanging off a main chain: every neighbor of a chain vertex
    /// that is not on the chain (and not excluded) roots a sub-branch.
    fn attachments(&mut self, path: &[usize], exclude: impl Fn(usize, usize) -> bool) -> Vec<(usize, NameAst)> {
        let mut atts = Vec::new();
        for (i, &v) in path.iter().enumerate() {
            for &nb in &self.adj[v] {
                let on_chain = (i > 0 && path[i - 1] == nb) || (i + 1 < path.len() && path[i + 1] == nb);
                if on_chain || exclude(nb, i) {
                    continue;
                }
                let (sub, _) = self.rooted(nb, v);
                atts.push((i + 1, sub));
            }
        }
        atts
    }

    fn name_tree(&mut self, suffix: Suffix) -> (NameAst, String) {
        let n = self.adj.len();
        if n == 1 {
            let ast = NameAst::from_attachments(Core::Chain(1), vec![], Some(suffix));
            let text = render(&ast);
            return (ast, text);
        }
        let runs: Vec<(Vec<usize>, Vec<usize>)> = (0..n).map(|s| bfs_from(self.adj, s, None)).collect();
        let diameter = runs
            .iter()
            .flat_map(|(d, _)| d.iter().copied())
            .max()
            .unwrap_or(0);
        let mut cands = Vec::new();
        for (u, (depth, parent)) in runs.iter().enumerate() {
            for w in 0..n {
                if depth[w] != diameter {
                    continue;
                }
                let path = trace(parent, u, w);
                let atts = self.attachments(&path, |_, _| false);
                let ast = NameAst::from_attachments(Core::Chain(path.len()), atts, Some(suffix));
                let text = render(&ast);
                cands.push((ast, text));
            }
        }
        pick_min(cands)
    }

    /// Names a component that contains at least one cycle.
    fn name_rings(&mut self, suffix: Suffix) -> (NameAst, String) {
        let in_core = two_core(self.adj);
        let core: Vec<usize> = (0..self.adj.len()).filter(|&v| in_core[v]).collect();
        let core_adj: Vec<Vec<usize>> = (0..self.adj.len())
            .map(|v| {
                if in_core[v] {
                    self.adj[v].iter().copied().filter(|&x| in_core[x]).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let m = core.len();
        let edges: usize = core.iter().map(|&v| core_adj[v].len()).sum::<usize>() / 2;
        let rank = edges + 1 - m;

        // hanging trees per core vertex, independent of numbering
        let mut hanging: BTreeMap<usize, Vec<NameAst>> = BTreeMap::new();
        for &v in &core {
            let subs: Vec<NameAst> = self.adj[v]
                .iter()
                .filter(|&&x| !in_core[x])
                .map(|&x| self.rooted(x, v).0)
                .collect();
            hanging.insert(v, subs);
        }

        let degree = |v: usize| core_adj[v].len();
        let high: Vec<usize> = core.iter().copied().filter(|&v| degree(v) > 2).collect();

        let shaped: Vec<(Core, Vec<usize>)> = if rank == 1 {
            cyclo_numberings(&core_adj, &core)
                .into_iter()
                .map(|num| (Core::Cyclo(m), num))
                .collect()
        } else if rank == 2 && high.len() == 1 && degree(high[0]) == 4 {
            spiro_numberings(&core_adj, high[0])
        } else if rank == 2 && high.len() == 2 {
            match bicyclo_numberings(&core_adj, high[0], high[1]) {
                Some(list) => list,
                None => self.poly_numberings(&core_adj, &core, &hanging),
            }
        } else {
            self.poly_numberings(&core_adj, &core, &hanging)
        };

        let cands = shaped.into_iter().map(|(core_kind, num)| {
            let atts: Vec<(usize, NameAst)> = num
                .iter()
                .enumerate()
                .flat_map(|(i, v)| hanging[v].iter().map(move |sub| (i + 1, sub.clone())))
                .collect();
            let ast = NameAst::from_attachments(core_kind, atts, Some(suffix));
            let text = render(&ast);
            (ast, text)
        });
        pick_min(cands)
    }

    fn poly_numberings(
        &self,
        core_adj: &[Vec<usize>],
        core: &[usize],
        hanging: &BTreeMap<usize, Vec<NameAst>>,
    ) -> Vec<(Core, Vec<usize>)> {
        let colors = refine_colors(core_adj, core, hanging);
        let mut out = Vec::new();
        let min_color = core.iter().map(|&v| colors[&v]).min().expect("non-empty core");
        let mut numbered: BTreeMap<usize, bool> = core.iter().map(|&v| (v, false)).collect();
        for &start in core.iter().filter(|&&v| colors[&v] == min_color) {
            let mut order = vec![start];
            numbered.insert(start, true);
            extend_order(core_adj, &colors, &mut order, &mut numbered, core.len(), &mut out);
            numbered.insert(start, false);
        }
        out.into_iter()
            .map(|num| {
                let pos: BTreeMap<usize, usize> = num.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
                let mut edges: Vec<(usize, usize)> = Vec::new();
                for &v in &num {
                    for &x in &core_adj[v] {
                        let (a, b) = (pos[&v], pos[&x]);
                        if a < b {
                            edges.push((a, b));
                        }
                    }
                }
                edges.sort_unstable();
                (Core::Polycyclo { edges, n: num.len() }, num)
            })
            .collect()
    }
}

/// Vertices that survive repeated removal of degree <= 1 vertices.
pub(crate) fn two_core(adj: &Adjacency) -> Vec<bool> {
    let n = adj.len();
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = queue.pop_front() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &x in &adj[v] {
            if alive[x] {
                deg[x] -= 1;
                if deg[x] == 1 {
                    queue.push_back(x);
                }
            }
        }
    }
    alive
}

fn cyclo_numberings(core_adj: &[Vec<usize>], core: &[usize]) -> Vec<Vec<usize>> {
    let start = core[0];
    let mut ring = vec![start];
    let mut prev = start;
    let mut cur = core_adj[start][0];
    while cur != start {
        ring.push(cur);
        let next = if core_adj[cur][0] != prev { core_adj[cur][0] } else { core_adj[cur][1] };
        prev = cur;
        cur = next;
    }
    let m = ring.len();
    let mut out = Vec::with_capacity(2 * m);
    for s in 0..m {
        out.push((0..m).map(|i| ring[(s + i) % m]).collect());
        out.push((0..m).map(|i| ring[(s + m - i) % m]).collect());
    }
    out
}

/// Walks from `from` through `first` along degree-2 core vertices until a
/// vertex of higher degree; returns the interior and the far end.
fn walk_bridge(core_adj: &[Vec<usize>], from: usize, first: usize) -> (Vec<usize>, usize) {
    let mut interior = Vec::new();
    let mut prev = from;
    let mut cur = first;
    while core_adj[cur].len() == 2 {
        interior.push(cur);
        let next = if core_adj[cur][0] != prev { core_adj[cur][0] } else { core_adj[cur][1] };
        prev = cur;
        cur = next;
    }
    (interior, cur)
}

/// Bridgehead-first numbering: bridgehead 1, the longest bridge, the other
/// bridgehead, the middle bridge walked back, then the shortest bridge from
/// the side of bridgehead 1. `None` if the core is not a theta.
fn bicyclo_numberings(core_adj: &[Vec<usize>], h1: usize, h2: usize) -> Option<Vec<(Core, Vec<usize>)>> {
    if core_adj[h1].len() != 3 || core_adj[h2].len() != 3 {
        return None;
    }
    let mut bridges = Vec::new();
    for &first in &core_adj[h1] {
        let (interior, end) = if first == h2 { (Vec::new(), h2) } else { walk_bridge(core_adj, h1, first) };
        if end != h2 {
            return None;
        }
        bridges.push(interior);
    }
    let n = 2 + bridges.iter().map(Vec::len).sum::<usize>();
    let mut sizes: Vec<usize> = bridges.iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let core = Core::Bicyclo {
        a: sizes[0],
        b: sizes[1],
        c: sizes[2],
        n,
    };
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for p in perms {
        let [a, b, c] = p.map(|i| &bridges[i]);
        if !(a.len() >= b.len() && b.len() >= c.len()) {
            continue;
        }
        for flip in [false, true] {
            let (one, other) = if flip { (h2, h1) } else { (h1, h2) };
            // bridges are stored from h1 towards h2
            let oriented = |br: &Vec<usize>| -> Vec<usize> {
                if flip {
                    br.iter().rev().copied().collect()
                } else {
                    br.clone()
                }
            };
            let mut num = vec![one];
            num.extend(oriented(a));
            num.push(other);
            num.extend(oriented(b).into_iter().rev());
            num.extend(oriented(c));
            out.push((core.clone(), num));
        }
    }
    Some(out)
}

/// Smaller ring first, starting next to the spiro vertex, then the spiro
/// vertex, then the larger ring.
fn spiro_numberings(core_adj: &[Vec<usize>], s: usize) -> Vec<(Core, Vec<usize>)> {
    let mut rings: Vec<Vec<usize>> = Vec::new();
    let mut seen_first = Vec::new();
    for &first in &core_adj[s] {
        if seen_first.contains(&first) {
            continue;
        }
        let (interior, end) = walk_bridge(core_adj, s, first);
        debug_assert_eq!(end, s);
        seen_first.push(*interior.last().expect("rings have interior vertices"));
        rings.push(interior);
    }
    rings.sort_by_key(Vec::len);
    let (small, large) = (&rings[0], &rings[1]);
    let n = small.len() + large.len() + 1;
    let core = Core::Spiro {
        a: large.len(),
        b: small.len(),
        n,
    };
    let mut orders: Vec<(&Vec<usize>, &Vec<usize>)> = vec![(small, large)];
    if small.len() == large.len() {
        orders.push((large, small));
    }
    let dirs = |r: &Vec<usize>| -> [Vec<usize>; 2] { [r.clone(), r.iter().rev().copied().collect()] };
    let mut out = Vec::new();
    for (first, second) in orders {
        for d1 in dirs(first) {
            for d2 in dirs(second) {
                let mut num = d1.clone();
                num.push(s);
                num.extend(d2);
                out.push((core.clone(), num));
            }
        }
    }
    out
}

/// Color refinement over the core: start from (core degree, hanging
/// descriptors) and refine by neighbor color multisets until stable.
fn refine_colors(
    core_adj: &[Vec<usize>],
    core: &[usize],
    hanging: &BTreeMap<usize, Vec<NameAst>>,
) -> BTreeMap<usize, usize> {
    let initial: BTreeMap<usize, String> = core
        .iter()
        .map(|&v| {
            let mut descs: Vec<String> = hanging[&v].iter().map(render_descriptor).collect();
            descs.sort();
            (v, format!("{}|{}", core_adj[v].len(), descs.join(";")))
        })
        .collect();
    let mut colors = rank(&initial);
    loop {
        let keyed: BTreeMap<usize, (usize, Vec<usize>)> = core
            .iter()
            .map(|&v| {
                let mut nb: Vec<usize> = core_adj[v].iter().map(|x| colors[x]).collect();
                nb.sort_unstable();
                (v, (colors[&v], nb))
            })
            .collect();
        let next = rank(&keyed);
        let classes = |c: &BTreeMap<usize, usize>| c.values().collect::<std::collections::BTreeSet<_>>().len();
        if classes(&next) == classes(&colors) {
            return next;
        }
        colors = next;
    }
}

fn rank<K: Ord + Clone>(keys: &BTreeMap<usize, K>) -> BTreeMap<usize, usize> {
    let mut distinct: Vec<K> = keys.values().cloned().collect();
    distinct.sort();
    distinct.dedup();
    keys.iter()
        .map(|(&v, k)| (v, distinct.binary_search(k).expect("key present")))
        .collect()
}

/// Breadth-first numbering with branching on ties: the next vertex is a
/// minimal-color unnumbered neighbor of the earliest numbered vertex that
/// still has unnumbered neighbors.
fn extend_order(
    core_adj: &[Vec<usize>],
    colors: &BTreeMap<usize, usize>,
    order: &mut Vec<usize>,
    numbered: &mut BTreeMap<usize, bool>,
    total: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if order.len() == total {
        out.push(order.clone());
        return;
    }
    for i in 0..order.len() {
        let x = order[i];
        let open: Vec<usize> = core_adj[x].iter().copied().filter(|y| !numbered[y]).collect();
        if open.is_empty() {
            continue;
        }
        let best = open.iter().map(|y| colors[y]).min().expect("non-empty");
        for y in open.into_iter().filter(|y| colors[y] == best) {
            order.push(y);
            numbered.insert(y, true);
            extend_order(core_adj, colors, order, numbered, total, out);
            numbered.insert(y, false);
            order.pop();
        }
        return;
    }
}

/// Canonical name of a connected graph given as adjacency lists.
pub(crate) fn name_component(adj: &Adjacency, suffix: Suffix) -> (NameAst, String) {
    let mut namer = Namer::new(adj);
    let edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
    if edges + 1 == adj.len() {
        namer.name_tree(suffix)
    } else {
        namer.name_rings(suffix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    fn name(n: usize, edges: &[(usize, usize)], suffix: Suffix) -> String {
        name_component(&adjacency(n, edges), suffix).1
    }

    #[test]
    fn acyclic() {
        assert_eq!(name(1, &[], Suffix::Ito), "monoito");
        assert_eq!(name(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], Suffix::Ito), "pentito");
        assert_eq!(name(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 5)], Suffix::Ito), "3-monopentito");
        let two_methyl = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 7), (3, 8)];
        assert_eq!(name(9, &two_methyl, Suffix::Ito), "2,4-dimonoheptito");
    }

    #[test]
    fn rings() {
        let hex: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        assert_eq!(name(6, &hex, Suffix::Idal), "cyclohexidal");
        let mut tail = hex.clone();
        tail.extend([(3, 6), (6, 7), (7, 8)]);
        assert_eq!(name(9, &tail, Suffix::Ito), "1-(tri)cyclohexito");
        // 5-ring 0..4 and 3-ring sharing edge 0-1
        let fused = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5), (5, 1)];
        assert_eq!(name(6, &fused, Suffix::Ito), "bicyclo[3.1.0]hexito");
        let spiro = [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 5), (5, 0)];
        assert_eq!(name(6, &spiro, Suffix::Oid), "spiro[3.2]hexoid");
    }

    #[test]
    fn dumbbell_falls_back() {
        let edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)];
        let text = name(6, &edges, Suffix::Ito);
        assert!(text.starts_with("polycyclo["), "{text}");
        assert!(text.ends_with("hexito"));
    }

    #[test]
    fn two_core_strips_trees() {
        let adj = adjacency(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]);
        assert_eq!(two_core(&adj), vec![true, true, true, false, false]);
    }
}
