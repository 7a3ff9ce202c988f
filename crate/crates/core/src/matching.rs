//! Assignment-based graph similarity, retrieval, and junction dictionaries.

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{embed_nodes, EmbedError, EmbedModel};
use crate::graph::{GraphView, NodeId, NodeRole, ObjectType, ReducedGraph};

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("cost matrix: {0}")]
    InvalidCost(String),
    #[error("embedding has no rows")]
    EmptyEmbedding,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("need at least {k} points, got {m}")]
    TooFewPoints { m: usize, k: usize },
    #[error("need at least {k} junctions, corpus has {found}")]
    TooFewJunctions { found: usize, k: usize },
    #[error("dictionary: {0}")]
    Dictionary(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// Non-negative finite costs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatchError> {
        if data.len() != rows * cols {
            return Err(MatchError::InvalidCost(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(MatchError::InvalidCost(format!("entry {bad} is not a finite non-negative value")));
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatchError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatchError::InvalidCost("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Pairwise Euclidean distances between embedding rows.
    pub fn l2(a: &Array2<f64>, b: &Array2<f64>) -> Self {
        let mut data = Vec::with_capacity(a.nrows() * b.nrows());
        for ra in a.rows() {
            for rb in b.rows() {
                data.push(l2(ra, rb));
            }
        }
        CostMatrix {
            rows: a.nrows(),
            cols: b.nrows(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn transposed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        CostMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

fn l2(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Matched `(row, col)` pairs of the unpadded matrix, sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total: f64,
}

/// Minimum-cost assignment. Rectangular inputs are padded square with the
/// largest entry; padded cells are left out of `pairs` and `total`.
pub fn hungarian(c: &CostMatrix) -> Assignment {
    let n = c.rows.max(c.cols);
    if n == 0 {
        return Assignment {
            pairs: Vec::new(),
            total: 0.0,
        };
    }
    let pad = c.data.iter().copied().fold(0.0, f64::max);
    let cost = |i: usize, j: usize| if i < c.rows && j < c.cols { c.get(i, j) } else { pad };

    // potentials formulation, 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = (1..=n)
        .filter(|&j| p[j] != 0)
        .map(|j| (p[j] - 1, j - 1))
        .filter(|&(i, j)| i < c.rows && j < c.cols)
        .collect();
    pairs.sort_unstable();
    let mut costs: Vec<f64> = pairs.iter().map(|&(i, j)| c.get(i, j)).collect();
    costs.sort_by(f64::total_cmp);
    Assignment {
        pairs,
        total: costs.iter().sum(),
    }
}

fn lex_cmp(a: &Array2<f64>, b: &Array2<f64>) -> std::cmp::Ordering {
    a.nrows()
        .cmp(&b.nrows())
        .then_with(|| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
}

/// Mean matched L2 cost between two node embeddings; 0 means identical up
/// to row order. Symmetric in its arguments.
pub fn graph_similarity(za: &Array2<f64>, zb: &Array2<f64>) -> Result<f64, MatchError> {
    if za.nrows() == 0 || zb.nrows() == 0 {
        return Err(MatchError::EmptyEmbedding);
    }
    let (x, y) = if lex_cmp(za, zb).is_le() { (za, zb) } else { (zb, za) };
    let a = hungarian(&CostMatrix::l2(x, y));
    Ok(a.total / za.nrows().min(zb.nrows()) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub object_id: String,
    pub score: f64,
}

/// Ranks the corpus by similarity to `query`, best first, skipping entries
/// that share the query's object id.
pub fn retrieve(
    query: &ReducedGraph,
    corpus: &[ReducedGraph],
    model: &EmbedModel,
    topk: usize,
) -> Result<Vec<Hit>, MatchError> {
    if corpus.is_empty() {
        return Err(MatchError::EmptyCorpus);
    }
    let zq = embed_nodes(model, query)?;
    let mut hits = Vec::new();
    for g in corpus {
        if g.object_id() == query.object_id() {
            continue;
        }
        let zg = embed_nodes(model, g)?;
        hits.push(Hit {
            object_id: g.object_id().to_string(),
            score: graph_similarity(&zq, &zg)?,
        });
    }
    hits.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.object_id.cmp(&b.object_id)));
    hits.truncate(topk);
    Ok(hits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Array2<f64>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub trace: Vec<f64>,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(p, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding followed by Lloyd iterations.
pub fn kmeans(points: &Array2<f64>, k: usize, seed: u64, max_iter: usize) -> Result<KMeans, MatchError> {
    let m = points.nrows();
    if k == 0 || m < k {
        return Err(MatchError::TooFewPoints { m, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = Array2::zeros((k, points.ncols()));
    centroids.row_mut(0).assign(&points.row(rng.random_range(0..m)));
    let mut d2: Vec<f64> = points.rows().into_iter().map(|p| sq_dist(p, centroids.row(0))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random_range(0.0..total);
            let mut idx = m - 1;
            for (i, &d) in d2.iter().enumerate() {
                if r < d {
                    idx = i;
                    break;
                }
                r -= d;
            }
            idx
        } else {
            rng.random_range(0..m)
        };
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centroids.row(c)));
        }
    }

    let mut labels = vec![usize::MAX; m];
    let mut trace = Vec::new();
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        let mut dist = vec![0.0; m];
        for (i, p) in points.rows().into_iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            dist[i] = d;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        trace.push(dist.iter().sum());
        if !changed {
            break;
        }
        let mut sums = Array2::<f64>::zeros(centroids.dim());
        let mut counts = vec![0usize; k];
        for (i, p) in points.rows().into_iter().enumerate() {
            let mut row = sums.row_mut(labels[i]);
            row += &p;
            counts[labels[i]] += 1;
        }
        let mut taken = BTreeSet::new();
        for c in 0..k {
            if counts[c] > 0 {
                let mean = &sums.row(c) / counts[c] as f64;
                centroids.row_mut(c).assign(&mean);
            } else {
                // reseed with the point farthest from its own centroid
                let far = (0..m)
                    .filter(|i| !taken.contains(i))
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .expect("m >= k");
                taken.insert(far);
                centroids.row_mut(c).assign(&points.row(far));
            }
        }
    }
    let inertia = points
        .rows()
        .into_iter()
        .zip(&labels)
        .map(|(p, &c)| sq_dist(p, centroids.row(c)))
        .sum();
    Ok(KMeans {
        centroids,
        labels,
        inertia,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dictionary {
    pub k: usize,
    pub source: String,
    pub centroids: Vec<Vec<f64>>,
}

impl Dictionary {
    fn matrix(&self) -> Result<Array2<f64>, MatchError> {
        let cols = self.centroids.first().map_or(0, Vec::len);
        if self.k == 0 || self.centroids.len() != self.k || self.centroids.iter().any(|r| r.len() != cols) {
            return Err(MatchError::Dictionary("centroid table does not match k".into()));
        }
        Array2::from_shape_vec((self.k, cols), self.centroids.concat()).map_err(|e| MatchError::Dictionary(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dictionary serializes");
        s.push('\n');
        s
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, MatchError> {
        let d: Dictionary = serde_json::from_slice(bytes).map_err(|e| MatchError::Dictionary(e.to_string()))?;
        d.matrix()?;
        Ok(d)
    }
}

/// Dictionary size used when none is given.
pub fn default_k(t: ObjectType) -> usize {
    match t {
        ObjectType::Mitochondrion => 100,
        ObjectType::PyramidalNeuron | ObjectType::Other => 50,
    }
}

/// Clusters the embeddings of every junction in the corpus.
pub fn build_dictionary(
    corpus: &[ReducedGraph],
    model: &EmbedModel,
    k: usize,
    seed: u64,
    source: &str,
) -> Result<Dictionary, MatchError> {
    let mut rows: Vec<f64> = Vec::new();
    let mut count = 0;
    let mut dim = 0;
    for g in corpus {
        if !g.nodes().iter().any(|n| n.role == NodeRole::Junction) {
            continue;
        }
        let z = embed_nodes(model, g)?;
        dim = z.ncols();
        for (node, row) in g.nodes().iter().zip(z.rows()) {
            if node.role == NodeRole::Junction {
                rows.extend(row.iter());
                count += 1;
            }
        }
    }
    if count < k.max(1) {
        return Err(MatchError::TooFewJunctions { found: count, k });
    }
    let points = Array2::from_shape_vec((count, dim), rows).expect("rows are uniform");
    let km = kmeans(&points, k, seed, 100)?;
    Ok(Dictionary {
        k,
        source: source.to_string(),
        centroids: km.centroids.rows().into_iter().map(|r| r.to_vec()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Part {
    pub word: usize,
    pub junction: NodeId,
    pub removed: BTreeSet<NodeId>,
}

/// Greedy junction-by-junction decomposition against a dictionary.
///
/// Each round takes the remaining junction closest to any word and removes
/// it together with its remaining non-junction neighbors.
pub fn decompose(query: &ReducedGraph, dict: &Dictionary, model: &EmbedModel) -> Result<Vec<Part>, MatchError> {
    let centroids = dict.matrix()?;
    let junctions: Vec<usize> = (0..query.nodes().len())
        .filter(|&i| query.nodes()[i].role == NodeRole::Junction)
        .collect();
    if junctions.is_empty() {
        return Ok(Vec::new());
    }
    let z = embed_nodes(model, query)?;
    if z.ncols() != centroids.ncols() {
        return Err(MatchError::Dictionary(format!(
            "centroids have {} dims, embeddings {}",
            centroids.ncols(),
            z.ncols()
        )));
    }
    let best: Vec<(usize, f64)> = (0..query.nodes().len()).map(|i| nearest(z.row(i), &centroids)).collect();
    let topo = query.topology();
    let mut removed = vec![false; query.nodes().len()];
    let mut parts = Vec::new();
    loop {
        let pick = junctions
            .iter()
            .copied()
            .filter(|&j| !removed[j])
            .min_by(|&a, &b| best[a].1.total_cmp(&best[b].1).then(a.cmp(&b)));
        let Some(j) = pick else { break };
        let mut part = BTreeSet::from([topo.ids[j]]);
        removed[j] = true;
        for &x in &topo.adj[j] {
            if !removed[x] && query.nodes()[x].role != NodeRole::Junction {
                removed[x] = true;
                part.insert(topo.ids[x]);
            }
        }
        parts.push(Part {
            word: best[j].0,
            junction: topo.ids[j],
            removed: part,
        });
    }
    Ok(parts)
}

const PALETTE: [&str; 10] = [
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6", "#bcf60c", "#fabebe",
];

/// Fill color per node for a decomposition, cycling through a fixed palette.
pub fn part_colors(parts: &[Part]) -> impl Fn(NodeId) -> Option<String> + '_ {
    move |id| {
        parts
            .iter()
            .position(|p| p.removed.contains(&id))
            .map(|i| PALETTE[i % PALETTE.len()].to_string())
    }
}
