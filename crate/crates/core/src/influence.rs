//! Minimum influence factors.
//!
//! For a node `i` in component `C`, `K(i)` is the unique matrix on `C` with
//! `𝟙e_iᵀ + ρ K(i) L_C = I` whose `i`-th row and column vanish. It satisfies
//! `(T e_i e_iᵀ + ρL_C)⁻¹ = 𝟙𝟙ᵀ/T + K(i)` for every `T ≥ 1`, so it is read
//! off a single inversion at `T = 1`.
//!
//! The minimum influence factor of `j` is `min_{i ∈ C_j, i ≠ j} 1/[K(i)]_jj`,
//! and zero for isolated nodes.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::linalg;

/// `K(i, G)` restricted to the component of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct KMatrix {
    /// Sampled node, as a global index.
    pub node: usize,
    /// Global indices of the component, sorted; rows/cols follow this order.
    pub component: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

impl KMatrix {
    /// Position of the sampled node within [`Self::component`].
    pub fn local_index(&self) -> usize {
        self.component
            .iter()
            .position(|&v| v == self.node)
            .expect("node belongs to its component")
    }

    /// `[K]_jj` for a global node `j` in the same component.
    pub fn diagonal_at(&self, j: usize) -> Option<f64> {
        let p = self.component.iter().position(|&v| v == j)?;
        Some(self.matrix[(p, p)])
    }
}

pub fn k_matrix(g: &SimilarityGraph, rho: f64, node: usize) -> Result<KMatrix> {
    let n = g.n();
    if node >= n {
        return Err(Error::ArmOutOfRange { arm: node, n });
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be > 0, got {rho}")));
    }
    if g.is_isolated(node) {
        return Err(Error::IsolatedNode(node));
    }
    let component = g.components()[g.component_of(node)].clone();
    let sub = g.subgraph(&component);
    let local = component.iter().position(|&v| v == node).unwrap();
    let mut v = sub.laplacian().matrix() * rho;
    v[(local, local)] += 1.0;
    let mut k = linalg::spd_inverse(&v)?;
    k.add_scalar_mut(-1.0);
    // Exact zeros where the identity forces them.
    k.row_mut(local).fill(0.0);
    k.column_mut(local).fill(0.0);
    Ok(KMatrix {
        node,
        component,
        matrix: k,
    })
}

/// `𝔍(j, G)` computed directly (one inversion per candidate node).
pub fn influence_factor(g: &SimilarityGraph, rho: f64, j: usize) -> Result<f64> {
    let n = g.n();
    if j >= n {
        return Err(Error::ArmOutOfRange { arm: j, n });
    }
    if g.is_isolated(j) {
        return Ok(0.0);
    }
    let component = &g.components()[g.component_of(j)];
    let mut diagonals = Vec::with_capacity(component.len() - 1);
    for &i in component.iter().filter(|&&i| i != j) {
        let k = k_matrix(g, rho, i)?;
        diagonals.push(k.diagonal_at(j).unwrap());
    }
    min_reciprocal(j, diagonals)
}

fn min_reciprocal(j: usize, diagonals: impl IntoIterator<Item = f64>) -> Result<f64> {
    diagonals
        .into_iter()
        .filter(|&d| d > 0.0)
        .map(|d| 1.0 / d)
        .min_by(f64::total_cmp)
        .ok_or(Error::DegenerateInfluence(j))
}

/// Per-node influence factors for a whole graph.
#[derive(Debug, Clone)]
pub struct InfluenceTable {
    rho: f64,
    factors: Vec<f64>,
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
    k_cache: BTreeMap<usize, KMatrix>,
}

/// One row of an influence report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfluenceRow {
    pub node: usize,
    pub component: usize,
    pub component_size: usize,
    pub influence: f64,
}

impl InfluenceTable {
    pub fn build(g: &SimilarityGraph, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be > 0, got {rho}")));
        }
        let per_component: Vec<Vec<KMatrix>> = g
            .components()
            .par_iter()
            .filter(|c| c.len() > 1)
            .map(|c| c.iter().map(|&i| k_matrix(g, rho, i)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let k_cache: BTreeMap<usize, KMatrix> = per_component
            .into_iter()
            .flatten()
            .map(|k| (k.node, k))
            .collect();

        let mut factors = vec![0.0; g.n()];
        for comp in g.components().iter().filter(|c| c.len() > 1) {
            for &j in comp {
                let diags = comp
                    .iter()
                    .filter(|&&i| i != j)
                    .map(|i| k_cache[i].diagonal_at(j).unwrap());
                factors[j] = min_reciprocal(j, diags)?;
            }
        }
        Ok(Self {
            rho,
            factors,
            components: g.components().to_vec(),
            component_of: (0..g.n()).map(|i| g.component_of(i)).collect(),
            k_cache,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn factor(&self, j: usize) -> f64 {
        self.factors[j]
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn component_of(&self, j: usize) -> usize {
        self.component_of[j]
    }

    pub fn component_size(&self, j: usize) -> usize {
        self.components[self.component_of[j]].len()
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    /// Cached `K(i, G)`, absent for isolated nodes.
    pub fn k(&self, i: usize) -> Option<&KMatrix> {
        self.k_cache.get(&i)
    }

    pub fn rows(&self) -> Vec<InfluenceRow> {
        (0..self.factors.len())
            .map(|node| InfluenceRow {
                node,
                component: self.component_of[node],
                component_size: self.component_size(node),
                influence: self.factors[node],
            })
            .collect()
    }
}

/// Upper bound on `[V⁻¹]_ii` in terms of the influence factor.
///
/// * unsampled arm (`t_i = 0`): `1/𝔍 + 1/T`
/// * sampled arm: `max{1/(t_i + 𝔍/2), 1/(t_i + (T - t_i)/2)}`
///
/// `T` is the number of samples drawn in the arm's connected component.
/// In the sampled branch the second term uses the samples drawn from the
/// *other* arms of the component, `T - t_i`; with `T` in its place the bound
/// fails whenever one arm holds most of the samples (e.g. `t_i = T` gives
/// `[V⁻¹]_ii = 1/T`).
pub fn diag_upper_bound(t_i: u64, total: u64, influence: f64) -> Result<f64> {
    if t_i > total {
        return Err(Error::InvalidParameter(format!(
            "arm count {t_i} exceeds component total {total}"
        )));
    }
    if t_i == 0 {
        if total == 0 {
            return Err(Error::InvalidParameter(
                "component has no samples; [V⁻¹]_ii is unbounded".into(),
            ));
        }
        if !(influence > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "influence must be > 0 for an unsampled arm, got {influence}"
            )));
        }
        return Ok(1.0 / influence + 1.0 / total as f64);
    }
    let t = t_i as f64;
    let others = (total - t_i) as f64;
    Ok((1.0 / (t + influence / 2.0)).max(1.0 / (t + others / 2.0)))
}

/// The bound exactly as stated with the full component total `T` in the
/// sampled branch. Kept to document the counterexample; do not use as an
/// oracle.
pub fn diag_upper_bound_as_stated(t_i: u64, total: u64, influence: f64) -> Result<f64> {
    if t_i == 0 {
        return diag_upper_bound(t_i, total, influence);
    }
    let t = t_i as f64;
    Ok((1.0 / (t + influence / 2.0)).max(1.0 / (t + total as f64 / 2.0)))
}
