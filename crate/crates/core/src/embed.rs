//! Variational graph autoencoder producing 16-dimensional node embeddings.
//!
//! Two graph convolutions (8 -> 32 -> 16, mean and log-scale heads), a
//! 16 x 16 fully connected map on the latent sample, and an inner-product
//! decoder. Gradients are written out by hand; training uses Adam.

use ndarray::{Array2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphView, NodeRole, ReducedGraph};

pub const D_IN: usize = 8;
pub const HIDDEN: usize = 32;
pub const LATENT: usize = 16;
const LOG_SIGMA_CLAMP: f64 = 10.0;
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("model file: {0}")]
    Model(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub kl_weight: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            lr: 0.01,
            epochs: 200,
            seed: 1,
            kl_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedModel {
    pub w0: Array2<f64>,
    pub w_mu: Array2<f64>,
    pub w_sigma: Array2<f64>,
    pub w_fc: Array2<f64>,
    pub hyper: Hyper,
}

/// Gradients, one per weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub w0: Array2<f64>,
    pub w_mu: Array2<f64>,
    pub w_sigma: Array2<f64>,
    pub w_fc: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub mu: Array2<f64>,
    pub log_sigma: Array2<f64>,
    pub recon: Array2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub bce: f64,
    pub kl: f64,
}

/// Per-epoch means over the corpus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainTrace {
    pub loss: Vec<f64>,
    pub bce: Vec<f64>,
    pub kl: Vec<f64>,
}

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..=limit))
}

impl EmbedModel {
    pub fn new(hyper: Hyper) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        EmbedModel {
            w0: glorot(D_IN, HIDDEN, &mut rng),
            w_mu: glorot(HIDDEN, LATENT, &mut rng),
            w_sigma: glorot(HIDDEN, LATENT, &mut rng),
            w_fc: glorot(LATENT, LATENT, &mut rng),
            hyper,
        }
    }

    pub fn zeros(hyper: Hyper) -> Self {
        EmbedModel {
            w0: Array2::zeros((D_IN, HIDDEN)),
            w_mu: Array2::zeros((HIDDEN, LATENT)),
            w_sigma: Array2::zeros((HIDDEN, LATENT)),
            w_fc: Array2::zeros((LATENT, LATENT)),
            hyper,
        }
    }

    fn check(&self) -> Result<(), EmbedError> {
        let shapes = [
            ("w0", self.w0.dim(), (D_IN, HIDDEN)),
            ("w_mu", self.w_mu.dim(), (HIDDEN, LATENT)),
            ("w_sigma", self.w_sigma.dim(), (HIDDEN, LATENT)),
            ("w_fc", self.w_fc.dim(), (LATENT, LATENT)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(EmbedError::DimensionMismatch(format!("{name} is {got:?}, expected {want:?}")));
            }
        }
        Ok(())
    }

    /// Mutable view of every weight matrix, in a fixed order.
    pub fn weights_mut(&mut self) -> [&mut Array2<f64>; 4] {
        [&mut self.w0, &mut self.w_mu, &mut self.w_sigma, &mut self.w_fc]
    }
}

impl Grads {
    pub fn as_array(&self) -> [&Array2<f64>; 4] {
        [&self.w0, &self.w_mu, &self.w_sigma, &self.w_fc]
    }
}

/// Structural features: one-hot of degree clamped to 1..=6, a junction flag
/// and a constant bias.
pub fn node_features(g: &ReducedGraph) -> Array2<f64> {
    let topo = g.topology();
    let mut x = Array2::zeros((topo.len(), D_IN));
    for (i, node) in g.nodes().iter().enumerate() {
        let slot = topo.degree(i).clamp(1, 6);
        x[[i, slot - 1]] = 1.0;
        x[[i, 6]] = if node.role == NodeRole::Junction { 1.0 } else { 0.0 };
        x[[i, 7]] = 1.0;
    }
    x
}

fn adjacency_with_self_loops<G: GraphView + ?Sized>(g: &G) -> Array2<f64> {
    let topo = g.topology();
    let n = topo.len();
    let mut a = Array2::eye(n);
    for (i, nbrs) in topo.adj.iter().enumerate() {
        for &j in nbrs {
            a[[i, j]] = 1.0;
        }
    }
    a
}

/// `D^-1/2 (A + I) D^-1/2` with `D` the degree matrix of `A + I`.
pub fn normalize_adjacency<G: GraphView + ?Sized>(g: &G) -> Array2<f64> {
    let t = adjacency_with_self_loops(g);
    let inv_sqrt: Vec<f64> = t.rows().into_iter().map(|r| 1.0 / r.sum().sqrt()).collect();
    let mut a = t;
    for ((i, j), v) in a.indexed_iter_mut() {
        *v *= inv_sqrt[i] * inv_sqrt[j];
    }
    a
}

/// Everything the forward pass needs about one graph.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub a_hat: Array2<f64>,
    pub x: Array2<f64>,
    pub target: Array2<f64>,
}

impl Prepared {
    pub fn new(g: &ReducedGraph) -> Result<Self, EmbedError> {
        if g.nodes().is_empty() {
            return Err(EmbedError::EmptyGraph);
        }
        Ok(Prepared {
            a_hat: normalize_adjacency(g),
            x: node_features(g),
            target: adjacency_with_self_loops(g),
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }
}

struct Cache {
    ax: Array2<f64>,
    pre: Array2<f64>,
    ah: Array2<f64>,
    mu: Array2<f64>,
    ls_raw: Array2<f64>,
    ls: Array2<f64>,
    z: Array2<f64>,
    zp: Array2<f64>,
    logits: Array2<f64>,
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^s)` without overflow.
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn run(m: &EmbedModel, p: &Prepared, noise: &Array2<f64>) -> Result<Cache, EmbedError> {
    m.check()?;
    if noise.dim() != (p.n(), LATENT) {
        return Err(EmbedError::DimensionMismatch(format!(
            "noise is {:?}, expected ({}, {LATENT})",
            noise.dim(),
            p.n()
        )));
    }
    let ax = p.a_hat.dot(&p.x);
    let pre = ax.dot(&m.w0);
    let h = pre.mapv(|v| v.max(0.0));
    let ah = p.a_hat.dot(&h);
    let mu = ah.dot(&m.w_mu);
    let ls_raw = ah.dot(&m.w_sigma);
    let ls = ls_raw.mapv(|v| v.clamp(-LOG_SIGMA_CLAMP, LOG_SIGMA_CLAMP));
    let mut z = mu.clone();
    Zip::from(&mut z).and(&ls).and(noise).for_each(|z, &l, &e| *z += l.exp() * e);
    let zp = z.dot(&m.w_fc);
    let logits = zp.dot(&zp.t());
    Ok(Cache {
        ax,
        pre,
        ah,
        mu,
        ls_raw,
        ls,
        z,
        zp,
        logits,
    })
}

pub fn forward(m: &EmbedModel, p: &Prepared, noise: &Array2<f64>) -> Result<Forward, EmbedError> {
    let c = run(m, p, noise)?;
    Ok(Forward {
        recon: c.logits.mapv(sigmoid),
        mu: c.mu,
        log_sigma: c.ls,
    })
}

fn positive_weight(target: &Array2<f64>) -> f64 {
    let total = target.len() as f64;
    let nnz = target.iter().filter(|&&t| t != 0.0).count() as f64;
    (total - nnz) / nnz
}

fn loss_from(m: &EmbedModel, p: &Prepared, c: &Cache) -> LossParts {
    let n = p.n() as f64;
    let w_pos = positive_weight(&p.target);
    let mut bce = 0.0;
    Zip::from(&c.logits).and(&p.target).for_each(|&s, &t| {
        bce += w_pos * t * softplus(-s) + (1.0 - t) * softplus(s);
    });
    bce /= n * n;
    let mut kl = 0.0;
    Zip::from(&c.mu).and(&c.ls).for_each(|&mu, &ls| {
        kl += 0.5 * ((2.0 * ls).exp() + mu * mu - 1.0 - 2.0 * ls);
    });
    kl /= n;
    LossParts {
        total: bce + m.hyper.kl_weight * kl,
        bce,
        kl,
    }
}

pub fn loss(m: &EmbedModel, p: &Prepared, noise: &Array2<f64>) -> Result<LossParts, EmbedError> {
    let c = run(m, p, noise)?;
    Ok(loss_from(m, p, &c))
}

/// Loss and its gradient with respect to every weight matrix.
pub fn loss_and_grads(m: &EmbedModel, p: &Prepared, noise: &Array2<f64>) -> Result<(LossParts, Grads), EmbedError> {
    let c = run(m, p, noise)?;
    let parts = loss_from(m, p, &c);
    let n = p.n() as f64;
    let w_pos = positive_weight(&p.target);
    let kw = m.hyper.kl_weight;

    let mut g_logits = c.logits.clone();
    Zip::from(&mut g_logits).and(&p.target).for_each(|g, &t| {
        let r = sigmoid(*g);
        *g = (-w_pos * t * (1.0 - r) + (1.0 - t) * r) / (n * n);
    });
    let g_zp = g_logits.dot(&c.zp) * 2.0;
    let w_fc = c.z.t().dot(&g_zp);
    let g_z = g_zp.dot(&m.w_fc.t());

    let mut g_mu = g_z.clone();
    Zip::from(&mut g_mu).and(&c.mu).for_each(|g, &mu| *g += kw * mu / n);
    let mut g_ls = g_z;
    Zip::from(&mut g_ls)
        .and(&c.ls)
        .and(&c.ls_raw)
        .and(noise)
        .for_each(|g, &ls, &raw, &e| {
            let through = *g * ls.exp() * e + kw * ((2.0 * ls).exp() - 1.0) / n;
            *g = if raw.abs() <= LOG_SIGMA_CLAMP { through } else { 0.0 };
        });
    let w_mu = c.ah.t().dot(&g_mu);
    let w_sigma = c.ah.t().dot(&g_ls);
    let g_ah = g_mu.dot(&m.w_mu.t()) + g_ls.dot(&m.w_sigma.t());
    let mut g_pre = p.a_hat.t().dot(&g_ah);
    Zip::from(&mut g_pre).and(&c.pre).for_each(|g, &v| {
        if v <= 0.0 {
            *g = 0.0;
        }
    });
    let w0 = c.ax.t().dot(&g_pre);
    Ok((parts, Grads { w0, w_mu, w_sigma, w_fc }))
}

/// Posterior means with zero noise.
pub fn embed_prepared(m: &EmbedModel, p: &Prepared) -> Result<Array2<f64>, EmbedError> {
    Ok(run(m, p, &Array2::zeros((p.n(), LATENT)))?.mu)
}

pub fn embed_nodes(m: &EmbedModel, g: &ReducedGraph) -> Result<Array2<f64>, EmbedError> {
    embed_prepared(m, &Prepared::new(g)?)
}

fn standard_normal(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, LATENT), || StandardNormal.sample(rng))
}

struct Adam {
    m: [Array2<f64>; 4],
    v: [Array2<f64>; 4],
    t: i32,
}

impl Adam {
    fn new(model: &EmbedModel) -> Self {
        let zeros = || {
            [
                Array2::zeros(model.w0.dim()),
                Array2::zeros(model.w_mu.dim()),
                Array2::zeros(model.w_sigma.dim()),
                Array2::zeros(model.w_fc.dim()),
            ]
        };
        Adam {
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut EmbedModel, grads: &Grads) {
        self.t += 1;
        let lr = model.hyper.lr;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for (k, (w, g)) in model.weights_mut().into_iter().zip(grads.as_array()).enumerate() {
            Zip::from(w).and(&mut self.m[k]).and(&mut self.v[k]).and(g).for_each(|w, m, v, &g| {
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                *w -= lr * (*m / c1) / ((*v / c2).sqrt() + EPS);
            });
        }
    }
}

/// Trains a fresh model: one Adam step per graph per epoch, fresh noise per
/// step.
pub fn train(corpus: &[ReducedGraph], hyper: Hyper) -> Result<(EmbedModel, TrainTrace), EmbedError> {
    let prepared: Vec<Prepared> = corpus
        .iter()
        .filter(|g| !g.nodes().is_empty())
        .map(Prepared::new)
        .collect::<Result<_, _>>()?;
    if prepared.is_empty() {
        return Err(EmbedError::EmptyCorpus);
    }
    let mut model = EmbedModel::new(hyper);
    // separate stream from initialization
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    rng.set_stream(1);
    let mut adam = Adam::new(&model);
    let mut trace = TrainTrace::default();
    let count = prepared.len() as f64;
    for _ in 0..hyper.epochs {
        let (mut loss, mut bce, mut kl) = (0.0, 0.0, 0.0);
        for p in &prepared {
            let noise = standard_normal(p.n(), &mut rng);
            let (parts, grads) = loss_and_grads(&model, p, &noise)?;
            adam.step(&mut model, &grads);
            loss += parts.total;
            bce += parts.bce;
            kl += parts.kl;
        }
        trace.loss.push(loss / count);
        trace.bce.push(bce / count);
        trace.kl.push(kl / count);
    }
    Ok((model, trace))
}

/// Area under the ROC curve of `scores` against binary `labels`, with tied
/// scores counted half. `None` if either class is empty.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            if labels[k] {
                rank_sum += avg_rank;
            }
        }
        i = j + 1;
    }
    let pos = pos as f64;
    Some((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg as f64))
}

/// Mean reconstruction AUC (zero noise) over graphs where it is defined.
pub fn reconstruction_auc(m: &EmbedModel, corpus: &[ReducedGraph]) -> Result<f64, EmbedError> {
    let mut total = 0.0;
    let mut count = 0usize;
    for g in corpus {
        let p = Prepared::new(g)?;
        let f = forward(m, &p, &Array2::zeros((p.n(), LATENT)))?;
        let scores: Vec<f64> = f.recon.iter().copied().collect();
        let labels: Vec<bool> = p.target.iter().map(|&t| t != 0.0).collect();
        if let Some(a) = auc(&scores, &labels) {
            total += a;
            count += 1;
        }
    }
    if count == 0 {
        return Err(EmbedError::EmptyCorpus);
    }
    Ok(total / count as f64)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    d_in: usize,
    hidden: usize,
    latent: usize,
    seed: u64,
    hyper: Hyper,
    w0: Vec<Vec<f64>>,
    w_mu: Vec<Vec<f64>>,
    w_sigma: Vec<Vec<f64>>,
    w_fc: Vec<Vec<f64>>,
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(name: &str, rows: Vec<Vec<f64>>, shape: (usize, usize)) -> Result<Array2<f64>, EmbedError> {
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(EmbedError::DimensionMismatch(format!("{name} should be {shape:?}")));
    }
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(EmbedError::Model(format!("{name} has non-finite entries")));
    }
    Array2::from_shape_vec(shape, flat).map_err(|e| EmbedError::Model(e.to_string()))
}

pub fn save_model(m: &EmbedModel) -> String {
    let file = ModelFile {
        d_in: D_IN,
        hidden: HIDDEN,
        latent: LATENT,
        seed: m.hyper.seed,
        hyper: m.hyper,
        w0: rows(&m.w0),
        w_mu: rows(&m.w_mu),
        w_sigma: rows(&m.w_sigma),
        w_fc: rows(&m.w_fc),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}

pub fn load_model(bytes: &[u8]) -> Result<EmbedModel, EmbedError> {
    let f: ModelFile = serde_json::from_slice(bytes).map_err(|e| EmbedError::Model(e.to_string()))?;
    if (f.d_in, f.hidden, f.latent) != (D_IN, HIDDEN, LATENT) {
        return Err(EmbedError::DimensionMismatch(format!(
            "model dims {}x{}x{}, expected {D_IN}x{HIDDEN}x{LATENT}",
            f.d_in, f.hidden, f.latent
        )));
    }
    Ok(EmbedModel {
        w0: from_rows("w0", f.w0, (D_IN, HIDDEN))?,
        w_mu: from_rows("w_mu", f.w_mu, (HIDDEN, LATENT))?,
        w_sigma: from_rows("w_sigma", f.w_sigma, (HIDDEN, LATENT))?,
        w_fc: from_rows("w_fc", f.w_fc, (LATENT, LATENT))?,
        hyper: f.hyper,
    })
}

/// Embedding rows as nested vectors, for serialization.
pub fn embedding_rows(z: &Array2<f64>) -> Vec<Vec<f64>> {
    rows(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ObjectType, ReducedEdge, ReducedNode};

    pub(crate) fn graph(n: usize, edges: &[(u64, u64)]) -> ReducedGraph {
        let mut deg = vec![0; n];
        for &(u, v) in edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let nodes = (0..n)
            .map(|i| ReducedNode {
                id: i as u64,
                role: if deg[i] > 2 { NodeRole::Junction } else { NodeRole::Endpoint },
                position: [0.0; 3],
                source_ids: vec![i as u64],
            })
            .collect();
        let edges = edges
            .iter()
            .map(|&(u, v)| ReducedEdge {
                u,
                v,
                length: 1.0,
                thickness: 1.0,
                skeleton_path: vec![],
            })
            .collect();
        ReducedGraph::new("g", ObjectType::Other, nodes, edges).unwrap()
    }

    #[test]
    fn features() {
        let star = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let x = node_features(&star);
        assert_eq!(x.row(0).to_vec(), vec![0., 0., 0., 1., 0., 0., 1., 1.]);
        assert_eq!(x.row(1).to_vec(), vec![1., 0., 0., 0., 0., 0., 0., 1.]);
        let edges: Vec<(u64, u64)> = (1..10).map(|i| (0, i)).collect();
        let big = graph(10, &edges);
        assert_eq!(node_features(&big)[[0, 5]], 1.0);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_adjacency(&graph(1, &[])), Array2::from_elem((1, 1), 1.0));
        let a = normalize_adjacency(&graph(2, &[(0, 1)]));
        assert!(a.iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn zero_model() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let p = Prepared::new(&g).unwrap();
        let m = EmbedModel::zeros(Hyper::default());
        let f = forward(&m, &p, &Array2::zeros((4, LATENT))).unwrap();
        assert!(f.mu.iter().all(|&v| v == 0.0));
        assert!(f.recon.iter().all(|&v| v == 0.5));
        assert_eq!(loss(&m, &p, &Array2::zeros((4, LATENT))).unwrap().kl, 0.0);
    }

    #[test]
    fn shape_errors() {
        let g = graph(3, &[(0, 1)]);
        let p = Prepared::new(&g).unwrap();
        let m = EmbedModel::new(Hyper::default());
        assert!(matches!(
            forward(&m, &p, &Array2::zeros((2, LATENT))),
            Err(EmbedError::DimensionMismatch(_))
        ));
        let mut bad = m.clone();
        bad.w_fc = Array2::zeros((3, 3));
        assert!(matches!(embed_nodes(&bad, &g), Err(EmbedError::DimensionMismatch(_))));
    }

    #[test]
    fn model_file_round_trip() {
        let m = EmbedModel::new(Hyper { seed: 9, ..Hyper::default() });
        let text = save_model(&m);
        assert_eq!(load_model(text.as_bytes()).unwrap(), m);
        assert!(load_model(b"{}").is_err());
    }

    #[test]
    fn auc_ranks() {
        assert_eq!(auc(&[0.1, 0.9], &[false, true]), Some(1.0));
        assert_eq!(auc(&[0.5, 0.5], &[false, true]), Some(0.5));
        assert_eq!(auc(&[0.9, 0.1], &[false, true]), Some(0.0));
        assert_eq!(auc(&[0.9], &[true]), None);
    }

    #[test]
    fn zero_learning_rate_freezes_weights() {
        let corpus = vec![graph(4, &[(0, 1), (1, 2), (1, 3)])];
        let hyper = Hyper {
            lr: 0.0,
            epochs: 3,
            ..Hyper::default()
        };
        let (m, trace) = train(&corpus, hyper).unwrap();
        assert_eq!(m, EmbedModel::new(hyper));
        assert_eq!(trace.loss.len(), 3);
        assert!(matches!(train(&[], hyper), Err(EmbedError::EmptyCorpus)));
    }
}
