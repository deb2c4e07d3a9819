//! Weighted undirected similarity graphs over arm indices.
//!
//! A [`SimilarityGraph`] stores a dense symmetric adjacency matrix together with
//! its connected-component partition. The combinatorial Laplacian `L = D - A`
//! is built on demand; its quadratic form `⟨x, Lx⟩ = Σ_{i<j} A_ij (x_i - x_j)²`
//! is the smoothness seminorm used throughout the crate.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance for PSD and nullity checks.
pub const EIGEN_TOL: f64 = 1e-9;

/// Weighted undirected graph on `n` arms.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    adjacency: DMatrix<f64>,
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
}

impl SimilarityGraph {
    /// Build from a dense adjacency matrix.
    pub fn from_adjacency(adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(Error::InvalidGraph(format!(
                "adjacency is {}x{}, not square",
                n,
                adjacency.ncols()
            )));
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("self loop at node {i}")));
            }
            for j in (i + 1)..n {
                let w = adjacency[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "edge {i}-{j} has invalid weight {w}"
                    )));
                }
                if w != adjacency[(j, i)] {
                    return Err(Error::InvalidGraph(format!("asymmetric weight at {i}-{j}")));
                }
            }
        }
        let components = components_of(n, |i, j| adjacency[(i, j)] > 0.0);
        let component_of = membership(n, &components);
        Ok(Self {
            adjacency,
            components,
            component_of,
        })
    }

    /// Build from an undirected edge list with positive weights. Each edge
    /// may be listed once.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adj = DMatrix::zeros(n, n);
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {u}-{v} out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self loop at node {u}")));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {u}-{v} has invalid weight {w}"
                )));
            }
            if adj[(u, v)] != 0.0 {
                return Err(Error::InvalidGraph(format!("duplicate edge {u}-{v}")));
            }
            adj[(u, v)] = w;
            adj[(v, u)] = w;
        }
        Self::from_adjacency(adj)
    }

    /// `n` isolated nodes.
    pub fn edgeless(n: usize) -> Self {
        Self::from_adjacency(DMatrix::zeros(n, n)).expect("zero matrix is a valid graph")
    }

    /// Complete graph with unit weights.
    pub fn complete(n: usize) -> Self {
        let mut adj = DMatrix::from_element(n, n, 1.0);
        adj.fill_diagonal(0.0);
        Self::from_adjacency(adj).expect("complete graph is valid")
    }

    /// Path `0 - 1 - ... - (n-1)` with unit weights.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        Self::from_edges(n, &edges).expect("path graph is valid")
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    /// Index into [`Self::components`] of the component containing `node`.
    pub fn component_of(&self, node: usize) -> usize {
        self.component_of[node]
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn is_isolated(&self, node: usize) -> bool {
        self.components[self.component_of[node]].len() == 1
    }

    /// Edges `(u, v, w)` with `u < v`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                let w = self.adjacency[(u, v)];
                if w > 0.0 {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Copy of this graph with edge `u-v` set to weight `w` (0 removes it).
    pub fn with_edge(&self, u: usize, v: usize, w: f64) -> Result<Self> {
        let n = self.n();
        if u >= n || v >= n || u == v {
            return Err(Error::InvalidGraph(format!("bad edge {u}-{v}")));
        }
        let mut adj = self.adjacency.clone();
        adj[(u, v)] = w;
        adj[(v, u)] = w;
        Self::from_adjacency(adj)
    }

    /// Induced subgraph on `nodes` (in the given order).
    pub fn subgraph(&self, nodes: &[usize]) -> Self {
        let m = nodes.len();
        let adj = DMatrix::from_fn(m, m, |a, b| self.adjacency[(nodes[a], nodes[b])]);
        Self::from_adjacency(adj).expect("induced subgraph of a valid graph is valid")
    }

    /// Combinatorial Laplacian `D - A`.
    pub fn laplacian(&self) -> Laplacian {
        build_laplacian(self)
    }

    /// Parse the text edge-list format:
    ///
    /// ```text
    /// n 4
    /// 0 1 1.0
    /// 2 3 0.5
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored. Weights must be
    /// strictly positive; a repeated edge (in either orientation) is an error.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (lineno, header) = lines
            .next()
            .ok_or_else(|| Error::InvalidGraph("empty graph file".into()))?;
        let mut parts = header.split_whitespace();
        let n = match (parts.next(), parts.next(), parts.next()) {
            (Some("n"), Some(v), None) => v.parse::<usize>().map_err(|_| {
                Error::InvalidGraph(format!("line {lineno}: bad node count {v:?}"))
            })?,
            _ => {
                return Err(Error::InvalidGraph(format!(
                    "line {lineno}: expected `n <N>`, got {header:?}"
                )))
            }
        };
        let mut edges = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::InvalidGraph(format!(
                    "line {lineno}: expected `u v w`, got {line:?}"
                )));
            }
            let bad = |what: &str| Error::InvalidGraph(format!("line {lineno}: bad {what}"));
            let u: usize = fields[0].parse().map_err(|_| bad("node index"))?;
            let v: usize = fields[1].parse().map_err(|_| bad("node index"))?;
            let w: f64 = fields[2].parse().map_err(|_| bad("weight"))?;
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "line {lineno}: weight must be positive, got {w}"
                )));
            }
            edges.push((u, v, w));
        }
        Self::from_edges(n, &edges)
    }

    /// Inverse of [`Self::parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n());
        for (u, v, w) in self.edges() {
            let _ = writeln!(out, "{u} {v} {w}");
        }
        out
    }
}

/// Combinatorial Laplacian `L = D - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian(DMatrix<f64>);

impl Laplacian {
    /// Wrap a matrix that is already a Laplacian. Checks symmetry, zero row
    /// sums and nonpositive off-diagonals.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::InvalidGraph("Laplacian must be square".into()));
        }
        let scale = m.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += m[(i, j)];
                if i != j && (m[(i, j)] > 0.0 || m[(i, j)] != m[(j, i)]) {
                    return Err(Error::InvalidGraph(format!(
                        "entry ({i},{j}) is not a valid Laplacian off-diagonal"
                    )));
                }
            }
            if row.abs() > 1e-9 * scale * n as f64 {
                return Err(Error::InvalidGraph(format!("row {i} does not sum to zero")));
            }
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        linalg::quadratic_form(&self.0, x)
    }

    /// Recover the graph whose Laplacian this is.
    pub fn to_graph(&self) -> SimilarityGraph {
        let n = self.n();
        let adj = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { -self.0[(i, j)] });
        SimilarityGraph::from_adjacency(adj).expect("validated Laplacian has a valid graph")
    }

    /// Connected components read off the off-diagonal sparsity pattern.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_of(self.n(), |i, j| self.0[(i, j)] < 0.0)
    }

    /// Number of eigenvalues below `EIGEN_TOL` relative to the spectral scale.
    pub fn nullity(&self) -> usize {
        let vals = linalg::sym_eigenvalues(&self.0);
        let scale = vals.last().copied().unwrap_or(0.0).abs().max(1.0);
        vals.iter().filter(|&&v| v.abs() <= EIGEN_TOL * scale).count()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::sym_eigenvalues(&self.0).first().copied().unwrap_or(0.0)
    }

    /// `L * factor` (still a Laplacian for `factor >= 0`).
    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }
}

pub fn build_laplacian(g: &SimilarityGraph) -> Laplacian {
    let n = g.n();
    let mut l = -g.adjacency.clone();
    for i in 0..n {
        let degree: f64 = g.adjacency.row(i).sum();
        l[(i, i)] = degree;
    }
    Laplacian(l)
}

pub fn connected_components(g: &SimilarityGraph) -> Vec<Vec<usize>> {
    g.components.clone()
}

/// Smoothness seminorm squared, `⟨μ, Lμ⟩`. A mean vector is ε-smooth when
/// the square root of this is at most ε.
pub fn smoothness(mu: &[f64], laplacian: &Laplacian) -> Result<f64> {
    if mu.len() != laplacian.n() {
        return Err(Error::DimensionMismatch {
            expected: laplacian.n(),
            got: mu.len(),
        });
    }
    let x = DVector::from_column_slice(mu);
    Ok(laplacian.quadratic_form(&x).max(0.0))
}

/// Result of comparing two Laplacians' quadratic forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Closeness {
    /// Smallest γ with `(1-γ) yᵀL_D y ≤ yᵀL_H y ≤ (1+γ) yᵀL_D y`.
    Gamma(f64),
    /// Null spaces differ, so no finite γ < 1 exists.
    Incompatible,
}

impl Closeness {
    pub fn gamma(self) -> Option<f64> {
        match self {
            Closeness::Gamma(g) => Some(g),
            Closeness::Incompatible => None,
        }
    }
}

/// How close `L_H` is to `L_D` in the sense of multiplicative agreement of
/// quadratic forms off the shared null space.
///
/// The extreme generalized eigenvalues of `(L_H, L_D)` are computed on an
/// orthonormal eigenbasis of the range of `L_D`.
pub fn gamma_closeness(l_d: &Laplacian, l_h: &Laplacian) -> Result<Closeness> {
    if l_d.n() != l_h.n() {
        return Err(Error::DimensionMismatch {
            expected: l_d.n(),
            got: l_h.n(),
        });
    }
    if l_d.components() != l_h.components() {
        return Ok(Closeness::Incompatible);
    }
    let n = l_d.n();
    let k = l_d.components().len();
    if k == n {
        // Both edgeless: the forms vanish identically.
        return Ok(Closeness::Gamma(0.0));
    }
    let eig = l_d.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // The k smallest eigenvalues span the component indicators.
    let range: Vec<usize> = order[k..].to_vec();
    let m = range.len();
    let mut basis = DMatrix::zeros(n, m);
    for (c, &idx) in range.iter().enumerate() {
        let lambda = eig.eigenvalues[idx];
        if lambda <= 0.0 {
            return Err(Error::Numerical(format!(
                "Laplacian eigenvalue {lambda} on the range is not positive"
            )));
        }
        let col = eig.eigenvectors.column(idx) / lambda.sqrt();
        basis.set_column(c, &col);
    }
    let mut reduced = basis.transpose() * l_h.matrix() * &basis;
    linalg::symmetrize(&mut reduced);
    let vals = linalg::sym_eigenvalues(&reduced);
    let lo = vals[0];
    let hi = vals[m - 1];
    let gamma = (1.0 - lo).max(hi - 1.0).max(0.0);
    Ok(Closeness::Gamma(gamma))
}

fn components_of(n: usize, connected: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if connected(i, j) {
                uf.union(i, j);
            }
        }
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = uf.find(i);
        by_root[r].push(i);
    }
    let mut parts: Vec<Vec<usize>> = by_root.into_iter().filter(|p| !p.is_empty()).collect();
    parts.sort_by_key(|p| p[0]);
    parts
}

fn membership(n: usize, components: &[Vec<usize>]) -> Vec<usize> {
    let mut of = vec![0; n];
    for (c, part) in components.iter().enumerate() {
        for &i in part {
            of[i] = c;
        }
    }
    of
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}
