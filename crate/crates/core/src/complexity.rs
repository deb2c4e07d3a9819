//! Arm classification and sample-complexity bounds.
//!
//! Arms are split into highly competitive (`H`), weakly competitive (`W`) and
//! non-competitive (`N`) sets by comparing the gap `Δ_j = μ* - μ_j` against
//! two graph-dependent thresholds built from the influence factor `𝔍(j)`.
//! The bound on the number of GRUB rounds is
//!
//! ```text
//! T = Σ_C [ Σ_{j ∈ H∩C, j ≠ a*} max(0, (c σ² ln(c σ² √(2n) / (√δ Δ_j²)) + ρε/2) / Δ_j² − 𝔍(j)/2) ]
//!   + Σ_C max{ max_{l ∈ W∩C} 𝔍(l), |W∩C| } + k(G)
//! ```
//!
//! with leading constant `c` (112 by default). Logarithms are natural.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{gamma_closeness, Closeness, SimilarityGraph};
use crate::influence::InfluenceTable;

/// Gate for treating a measured γ as within the requested level.
const GAMMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArmClass {
    #[serde(rename = "H")]
    Highly,
    #[serde(rename = "W")]
    Weakly,
    #[serde(rename = "N")]
    Non,
}

impl ArmClass {
    pub fn symbol(self) -> &'static str {
        match self {
            ArmClass::Highly => "H",
            ArmClass::Weakly => "W",
            ArmClass::Non => "N",
        }
    }
}

/// Constants in the per-arm term `(outer σ² ln(inner σ² √2 √n / (√δ Δ²)) + ρε/2)/Δ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadingConstants {
    pub outer: f64,
    pub inner: f64,
}

impl LeadingConstants {
    /// 112 / 112, the default.
    pub const STANDARD: Self = Self {
        outer: 112.0,
        inner: 112.0,
    };
    /// 448 / 224, a more conservative pair.
    pub const CONSERVATIVE: Self = Self {
        outer: 448.0,
        inner: 224.0,
    };
}

impl Default for LeadingConstants {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Problem parameters entering the thresholds and the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub sigma: f64,
    pub delta: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub constants: LeadingConstants,
}

impl BoundParams {
    pub fn new(sigma: f64, delta: f64, rho: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            sigma,
            delta,
            rho,
            epsilon,
            constants: LeadingConstants::STANDARD,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_constants(mut self, constants: LeadingConstants) -> Self {
        self.constants = constants;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.rho > 0.0) {
            return Err(Error::InvalidParameter(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Upper threshold on `Δ_j` for membership in `H`; `+∞` for isolated arms.
    pub fn highly_threshold(&self, influence: f64, component_size: usize) -> f64 {
        if influence <= 0.0 {
            return f64::INFINITY;
        }
        let log = (2.0 * influence * influence * component_size as f64 / self.delta)
            .ln()
            .max(0.0);
        2.0 * (2.0 / influence).sqrt() * (2.0 * self.sigma * (14.0 * log).sqrt() + self.rho * self.epsilon)
    }

    /// Lower threshold on `Δ_j` for membership in `N`; `+∞` for isolated arms.
    pub fn non_threshold(&self, influence: f64, component_size: usize) -> f64 {
        if influence <= 0.0 {
            return f64::INFINITY;
        }
        let log = (2.0 * component_size as f64 / self.delta).ln().max(0.0);
        2.0 * (1.0 + 2.0 / influence).sqrt()
            * (2.0 * self.sigma * (14.0 * log).sqrt() + self.rho * self.epsilon)
    }

    /// Samples needed for an `H` arm before the `-𝔍/2` offset, with the gap
    /// denominator `denom_sq` (Δ², (1-γ)Δ² or max{Δ², ζ²}) and log gap `log_gap_sq`.
    fn h_term(&self, n: usize, denom_sq: f64, log_gap_sq: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let c = self.constants;
        let arg = c.inner * s2 * 2f64.sqrt() * (n as f64).sqrt() / (self.delta.sqrt() * log_gap_sq);
        (c.outer * s2 * arg.ln() + self.rho * self.epsilon / 2.0) / denom_sq
    }
}

/// H/W/N membership of every arm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompetitiveSplit {
    pub best: usize,
    pub gaps: Vec<f64>,
    pub classes: Vec<ArmClass>,
}

impl CompetitiveSplit {
    pub fn members(&self, class: ArmClass) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&j| self.classes[j] == class)
            .collect()
    }
}

/// Unique argmax of `mu`.
pub fn best_arm(mu: &[f64]) -> Result<usize> {
    let max = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tops: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] == max).collect();
    match tops.as_slice() {
        [one] => Ok(*one),
        [] => Err(Error::InvalidParameter("empty mean vector".into())),
        _ => Err(Error::MultipleOptima(tops)),
    }
}

/// Assign every arm to `N`, else `H`, else `W`.
pub fn classify_arms(
    mu: &[f64],
    influence: &InfluenceTable,
    params: &BoundParams,
) -> Result<CompetitiveSplit> {
    params.validate()?;
    let n = influence.factors().len();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: mu.len(),
        });
    }
    let best = best_arm(mu)?;
    let gaps: Vec<f64> = mu.iter().map(|m| mu[best] - m).collect();
    let classes = (0..n)
        .map(|j| {
            let f = influence.factor(j);
            let size = influence.component_size(j);
            if gaps[j] >= params.non_threshold(f, size) {
                ArmClass::Non
            } else if gaps[j] <= params.highly_threshold(f, size) {
                ArmClass::Highly
            } else {
                ArmClass::Weakly
            }
        })
        .collect();
    Ok(CompetitiveSplit {
        best,
        gaps,
        classes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentTerms {
    pub component: usize,
    /// Sum of floored per-arm `H` terms.
    pub highly: f64,
    /// `max{max 𝔍, |W∩C|}`, zero when `W∩C` is empty.
    pub weakly: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub t_bound: f64,
    pub k: usize,
    pub per_component: Vec<ComponentTerms>,
    /// Floored `H` term per arm; zero for `W`, `N` and the best arm.
    pub arm_terms: Vec<f64>,
}

#[derive(Clone, Copy)]
enum GapMode {
    Plain,
    Gamma(f64),
    Zeta(f64),
}

fn evaluate(
    split: &CompetitiveSplit,
    influence: &InfluenceTable,
    params: &BoundParams,
    mode: GapMode,
) -> Result<ComplexityReport> {
    let n = split.gaps.len();
    if let Some(dup) = (0..n).find(|&j| j != split.best && split.gaps[j] == 0.0) {
        return Err(Error::MultipleOptima(vec![split.best, dup]));
    }
    let mut arm_terms = vec![0.0; n];
    let mut per_component = Vec::with_capacity(influence.components().len());
    for (c, comp) in influence.components().iter().enumerate() {
        let mut highly = 0.0;
        let mut w_count = 0usize;
        let mut w_max = 0.0_f64;
        for &j in comp {
            match split.classes[j] {
                ArmClass::Highly if j != split.best => {
                    let d2 = split.gaps[j] * split.gaps[j];
                    let (denom, log_gap) = match mode {
                        GapMode::Plain => (d2, d2),
                        GapMode::Gamma(g) => ((1.0 - g) * d2, (1.0 - g) * d2),
                        GapMode::Zeta(z) => (d2.max(z * z), d2),
                    };
                    let term =
                        (params.h_term(n, denom, log_gap) - influence.factor(j) / 2.0).max(0.0);
                    arm_terms[j] = term;
                    highly += term;
                }
                ArmClass::Weakly => {
                    w_count += 1;
                    w_max = w_max.max(influence.factor(j));
                }
                _ => {}
            }
        }
        let weakly = if w_count == 0 {
            0.0
        } else {
            w_max.max(w_count as f64)
        };
        per_component.push(ComponentTerms {
            component: c,
            highly,
            weakly,
        });
    }
    let k = influence.components().len();
    let t_bound = per_component
        .iter()
        .map(|t| t.highly + t.weakly)
        .sum::<f64>()
        + k as f64;
    Ok(ComplexityReport {
        t_bound,
        k,
        per_component,
        arm_terms,
    })
}

/// Bound on GRUB rounds for exact best-arm identification.
pub fn sample_complexity(
    split: &CompetitiveSplit,
    influence: &InfluenceTable,
    params: &BoundParams,
) -> Result<ComplexityReport> {
    evaluate(split, influence, params, GapMode::Plain)
}

/// Bound for ζ-best-arm identification: `Δ_j²` in the prefactor becomes
/// `max{Δ_j², ζ²}`.
pub fn zeta_complexity(
    split: &CompetitiveSplit,
    influence: &InfluenceTable,
    params: &BoundParams,
    zeta: f64,
) -> Result<ComplexityReport> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::InvalidParameter(format!("zeta must be > 0, got {zeta}")));
    }
    evaluate(split, influence, params, GapMode::Zeta(zeta))
}

/// Outcome of the γ-relaxed bound over explicit candidates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaComplexity {
    pub best_index: usize,
    pub t_gamma: f64,
    /// `T_γ` per candidate, in input order.
    pub per_candidate: Vec<f64>,
    pub measured_gamma: Vec<f64>,
}

/// Minimum of the γ-relaxed bound over user-supplied candidate graphs
/// `(H, γ)`. Each candidate must be γ-close to `graph`, measured with
/// [`gamma_closeness`]; influence factors and classes come from `H`.
pub fn gamma_complexity(
    graph: &SimilarityGraph,
    mu: &[f64],
    candidates: &[(SimilarityGraph, f64)],
    params: &BoundParams,
) -> Result<GammaComplexity> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate graphs".into()));
    }
    let base = graph.laplacian();
    let mut per_candidate = Vec::with_capacity(candidates.len());
    let mut measured_gamma = Vec::with_capacity(candidates.len());
    for (index, (h, gamma)) in candidates.iter().enumerate() {
        if !(*gamma >= 0.0 && *gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "candidate {index}: gamma must lie in [0, 1), got {gamma}"
            )));
        }
        let measured = match gamma_closeness(&base, &h.laplacian())? {
            Closeness::Gamma(g) => g,
            Closeness::Incompatible => {
                return Err(Error::NotGammaClose {
                    index,
                    requested: *gamma,
                    measured: None,
                })
            }
        };
        if measured > gamma + GAMMA_TOL {
            return Err(Error::NotGammaClose {
                index,
                requested: *gamma,
                measured: Some(measured),
            });
        }
        let table = InfluenceTable::build(h, params.rho)?;
        let split = classify_arms(mu, &table, params)?;
        let mode = if *gamma == 0.0 {
            GapMode::Plain
        } else {
            GapMode::Gamma(*gamma)
        };
        per_candidate.push(evaluate(&split, &table, params, mode)?.t_bound);
        measured_gamma.push(measured);
    }
    let best_index = (0..per_candidate.len())
        .min_by(|&a, &b| per_candidate[a].total_cmp(&per_candidate[b]))
        .unwrap();
    Ok(GammaComplexity {
        best_index,
        t_gamma: per_candidate[best_index],
        per_candidate,
        measured_gamma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmRatio {
    pub arm: usize,
    /// Graph-free samples over graph-aware samples; infinite when the
    /// graph-aware term is floored at zero.
    pub ratio: f64,
    /// `ρε < 𝔍(j) Δ_j²`.
    pub net_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovementReport {
    /// `|N| / k(G)`.
    pub noncompetitive: f64,
    /// Largest `(𝔍/2) ln(𝔍/δ)` over `W`, the order of the weak-class gain.
    pub weak_bound: Option<f64>,
    pub highly: Vec<ArmRatio>,
}

pub fn improvement_ratio(
    split: &CompetitiveSplit,
    influence: &InfluenceTable,
    params: &BoundParams,
) -> Result<ImprovementReport> {
    let n = split.gaps.len();
    let k = influence.components().len();
    let non = split.members(ArmClass::Non).len();
    let weak_bound = split
        .members(ArmClass::Weakly)
        .into_iter()
        .map(|j| {
            let f = influence.factor(j);
            f / 2.0 * (f / params.delta).ln()
        })
        .max_by(f64::total_cmp);
    let no_eps = BoundParams {
        epsilon: 0.0,
        ..*params
    };
    let highly = split
        .members(ArmClass::Highly)
        .into_iter()
        .filter(|&j| j != split.best)
        .map(|j| {
            let d2 = split.gaps[j] * split.gaps[j];
            let without = no_eps.h_term(n, d2, d2);
            let with = (params.h_term(n, d2, d2) - influence.factor(j) / 2.0).max(0.0);
            ArmRatio {
                arm: j,
                ratio: if with > 0.0 { without / with } else { f64::INFINITY },
                net_positive: params.rho * params.epsilon < influence.factor(j) * d2,
            }
        })
        .collect();
    Ok(ImprovementReport {
        noncompetitive: non as f64 / k as f64,
        weak_bound,
        highly,
    })
}
