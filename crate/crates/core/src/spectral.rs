//! Laplacian spectra and cosine-based evaluation.

use thiserror::Error;

use crate::graph::{GraphView, ReducedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("no spectrum pairs given")]
    EmptyList,
}

/// Laplacian eigenvalues, descending, clamped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
}

const OFF_DIAGONAL_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix (row-major, `n x n`) by cyclic Jacobi
/// rotations. Unsorted.
pub fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..MAX_SWEEPS {
        if off(&a) < OFF_DIAGONAL_TOL {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

fn finish(mut values: Vec<f64>) -> Spectrum {
    for v in &mut values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Spectrum { eigenvalues: values }
}

/// Combinatorial Laplacian `D - A` of the underlying simple graph.
pub fn laplacian<G: GraphView + ?Sized>(g: &G) -> (Vec<f64>, usize) {
    let topo = g.topology();
    let n = topo.len();
    let mut l = vec![0.0; n * n];
    for (i, nbrs) in topo.adj.iter().enumerate() {
        l[i * n + i] = nbrs.len() as f64;
        for &j in nbrs {
            l[i * n + j] = -1.0;
        }
    }
    (l, n)
}

pub fn laplacian_eigenvalues<G: GraphView + ?Sized>(g: &G) -> Result<Spectrum, SpectralError> {
    let (l, n) = laplacian(g);
    if n == 0 {
        return Err(SpectralError::EmptyGraph);
    }
    Ok(finish(jacobi_eigenvalues(l, n)))
}

/// Laplacian weighted by edge length.
pub fn weighted_laplacian_eigenvalues(g: &ReducedGraph) -> Result<Spectrum, SpectralError> {
    let n = g.nodes().len();
    if n == 0 {
        return Err(SpectralError::EmptyGraph);
    }
    let mut l = vec![0.0; n * n];
    for e in g.edges() {
        let i = g.node_index(e.u).expect("validated edge");
        let j = g.node_index(e.v).expect("validated edge");
        l[i * n + j] -= e.length;
        l[j * n + i] -= e.length;
        l[i * n + i] += e.length;
        l[j * n + j] += e.length;
    }
    Ok(finish(jacobi_eigenvalues(l, n)))
}

/// Cosine of two spectra after zero-padding the shorter one. Two all-zero
/// spectra score 1.
pub fn spectrum_cosine(a: &Spectrum, b: &Spectrum) -> f64 {
    let len = a.eigenvalues.len().max(b.eigenvalues.len());
    let at = |s: &Spectrum, i: usize| s.eigenvalues.get(i).copied().unwrap_or(0.0);
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for i in 0..len {
        let (x, y) = (at(a, i), at(b, i));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 && nb == 0.0 {
        return 1.0;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0)
}

/// Fraction of pairs whose cosine reaches `threshold`.
pub fn accuracy(pairs: &[(Spectrum, Spectrum)], threshold: f64) -> Result<f64, SpectralError> {
    if pairs.is_empty() {
        return Err(SpectralError::EmptyList);
    }
    let hits = pairs.iter().filter(|(a, b)| spectrum_cosine(a, b) >= threshold).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// Mean cosine over pairs.
pub fn mean_cosine(pairs: &[(Spectrum, Spectrum)]) -> Result<f64, SpectralError> {
    if pairs.is_empty() {
        return Err(SpectralError::EmptyList);
    }
    Ok(pairs.iter().map(|(a, b)| spectrum_cosine(a, b)).sum::<f64>() / pairs.len() as f64)
}
