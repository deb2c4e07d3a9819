#![allow(dead_code)]

use grub_core::SimilarityGraph;
use nalgebra::DMatrix;
use rand::Rng;

/// Random spanning tree plus extra edges with probability `p`; weights in
/// `[0.5, 2)`.
pub fn random_connected(rng: &mut impl Rng, n: usize, p: f64) -> SimilarityGraph {
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u, v, rng.random_range(0.5..2.0)));
        present[u][v] = true;
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.random_bool(p) {
                edges.push((u, v, rng.random_range(0.5..2.0)));
            }
        }
    }
    SimilarityGraph::from_edges(n, &edges).unwrap()
}

/// Unit-weight connected graph.
pub fn random_connected_unit(rng: &mut impl Rng, n: usize, p: f64) -> SimilarityGraph {
    let g = random_connected(rng, n, p);
    let edges: Vec<_> = g.edges().into_iter().map(|(u, v, _)| (u, v, 1.0)).collect();
    SimilarityGraph::from_edges(n, &edges).unwrap()
}

/// Erdős–Rényi graph, possibly disconnected.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> SimilarityGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v, rng.random_range(0.5..2.0)));
            }
        }
    }
    SimilarityGraph::from_edges(n, &edges).unwrap()
}

/// `D - A` written out from the edge list.
pub fn laplacian_from_edges(g: &SimilarityGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for (u, v, w) in g.edges() {
        l[(u, u)] += w;
        l[(v, v)] += w;
        l[(u, v)] -= w;
        l[(v, u)] -= w;
    }
    l
}

/// `(diag(counts) + ρL)⁻¹` by LU.
pub fn dense_vinv(g: &SimilarityGraph, rho: f64, counts: &[u64]) -> DMatrix<f64> {
    let mut v = laplacian_from_edges(g) * rho;
    for (i, &c) in counts.iter().enumerate() {
        v[(i, i)] += c as f64;
    }
    v.lu().try_inverse().expect("design is invertible")
}

/// Effective resistance between `i` and `j` in a connected graph, from the
/// Laplacian pseudoinverse.
pub fn effective_resistance(g: &SimilarityGraph, i: usize, j: usize) -> f64 {
    let n = g.n();
    let l = laplacian_from_edges(g);
    let j_over_n = DMatrix::from_element(n, n, 1.0 / n as f64);
    let pinv = (l + &j_over_n).try_inverse().unwrap() - j_over_n;
    pinv[(i, i)] + pinv[(j, j)] - 2.0 * pinv[(i, j)]
}

pub fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}
