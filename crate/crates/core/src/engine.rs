//! GRUB and ζ-GRUB elimination runs.
//!
//! A run samples the lowest-index arm of every connected component, then
//! repeatedly pulls the arm chosen by the sampling policy, refreshes the
//! regularized estimate and drops every arm whose upper confidence bound
//! falls below the highest lower bound. It stops when one arm is left, when
//! (in ζ mode) every surviving width satisfies `2w ≤ ζ`, or at the step cap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{ConfidenceParams, DesignState};
use crate::graph::SimilarityGraph;
use crate::linalg::argmax_lowest;
use crate::policy::{PolicyKind, Sampler};

/// Source of rewards for a run. Implementations own their randomness.
pub trait RewardSource {
    fn pull(&mut self, arm: usize) -> f64;
}

impl<F: FnMut(usize) -> f64> RewardSource for F {
    fn pull(&mut self, arm: usize) -> f64 {
        self(arm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ConfidenceParams,
    pub rho: f64,
    /// `Some(ζ)` switches to ζ-best-arm mode.
    pub zeta: Option<f64>,
    pub policy: PolicyKind,
    /// Hard cap on total pulls, including the initialization pass.
    pub max_steps: u64,
    pub seed: u64,
}

impl RunConfig {
    /// Defaults: cyclic policy, exact best-arm mode, cap of `50 n` pulls.
    pub fn new(params: ConfidenceParams, rho: f64) -> Self {
        Self {
            max_steps: 50 * params.n as u64,
            params,
            rho,
            zeta: None,
            policy: PolicyKind::Cyclic,
            seed: 0,
        }
    }

    pub fn with_policy(mut self, policy: PolicyKind) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_zeta(mut self, zeta: f64) -> Self {
        self.zeta = Some(zeta);
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be > 0, got {}", self.rho)));
        }
        if self.max_steps < self.params.n as u64 {
            return Err(Error::InvalidParameter(format!(
                "max_steps {} is below the arm count {}",
                self.max_steps, self.params.n
            )));
        }
        if let Some(z) = self.zeta {
            if !(z >= 0.0) || !z.is_finite() {
                return Err(Error::InvalidParameter(format!("zeta must be >= 0, got {z}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    /// One arm left.
    Singleton,
    /// Every surviving arm's doubled width is at most ζ.
    Zeta,
    /// Step cap reached; the winner is the best surviving estimate and is
    /// not backed by the confidence guarantee.
    Cap,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Singleton => "singleton",
            Termination::Zeta => "zeta",
            Termination::Cap => "cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    /// 1-based pull index.
    pub step: u64,
    pub arm: usize,
    pub reward: f64,
    /// Active-set size after this step's elimination.
    pub active_count: usize,
    pub eliminated: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub steps: Vec<StepRecord>,
    pub winner: usize,
    pub total_pulls: u64,
    pub terminated_by: Termination,
    pub final_active: Vec<usize>,
}

impl RunTrace {
    /// Active-set size after each step.
    pub fn active_curve(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.active_count).collect()
    }
}

/// Pull one arm per connected component (its lowest index), appending
/// trace records. Leaves `state` identifiable.
pub fn cluster_init(
    state: &mut DesignState,
    graph: &SimilarityGraph,
    rewards: &mut dyn RewardSource,
    steps: &mut Vec<StepRecord>,
) -> Result<()> {
    for comp in graph.components() {
        let arm = comp[0];
        let reward = rewards.pull(arm);
        state.record_pull(arm, reward)?;
        steps.push(StepRecord {
            step: steps.len() as u64 + 1,
            arm,
            reward,
            active_count: graph.n(),
            eliminated: Vec::new(),
        });
    }
    Ok(())
}

/// Elimination on explicit estimates and widths. Returns the retained arms
/// (sorted) and the removed ones.
pub fn eliminate_by_bounds(
    active: &[usize],
    mu_hat: &[f64],
    widths: &[f64],
) -> (Vec<usize>, Vec<usize>) {
    let Some(a_max) = argmax_lowest(active.iter().map(|&i| (i, mu_hat[i] - widths[i]))) else {
        return (Vec::new(), Vec::new());
    };
    let lead = mu_hat[a_max];
    active
        .iter()
        .partition(|&&a| a == a_max || lead - mu_hat[a] <= widths[a_max] + widths[a])
}

pub fn eliminate(
    active: &[usize],
    state: &DesignState,
    params: &ConfidenceParams,
) -> Result<Vec<usize>> {
    let est = state.estimate(params)?;
    Ok(eliminate_by_bounds(active, &est.mu_hat, &est.widths).0)
}

/// Exact best-arm identification.
pub fn grub_run(
    graph: &SimilarityGraph,
    config: &RunConfig,
    rewards: &mut dyn RewardSource,
) -> Result<RunTrace> {
    if config.zeta.is_some() {
        return Err(Error::InvalidParameter(
            "grub_run takes no zeta; use zeta_grub_run".into(),
        ));
    }
    run(graph, config, rewards)
}

/// ζ-best-arm identification.
pub fn zeta_grub_run(
    graph: &SimilarityGraph,
    config: &RunConfig,
    rewards: &mut dyn RewardSource,
) -> Result<RunTrace> {
    match config.zeta {
        Some(z) if z >= 0.0 => run(graph, config, rewards),
        _ => Err(Error::InvalidParameter("zeta_grub_run needs zeta >= 0".into())),
    }
}

/// Shared loop for both modes; `config.zeta` selects the stop rule.
pub fn run(
    graph: &SimilarityGraph,
    config: &RunConfig,
    rewards: &mut dyn RewardSource,
) -> Result<RunTrace> {
    config.validate()?;
    let n = graph.n();
    if config.params.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: config.params.n,
        });
    }
    let params = &config.params;
    let mut state = DesignState::new(&graph.laplacian(), config.rho)?;
    let mut sampler = Sampler::new(config.policy);
    let mut active: Vec<usize> = (0..n).collect();
    let mut steps = Vec::new();

    cluster_init(&mut state, graph, rewards, &mut steps)?;

    loop {
        let est = state.estimate(params)?;
        let (kept, removed) = eliminate_by_bounds(&active, &est.mu_hat, &est.widths);
        active = kept;
        if let Some(last) = steps.last_mut() {
            last.active_count = active.len();
            last.eliminated = removed;
        }

        let finish = if active.len() == 1 {
            Some((active[0], Termination::Singleton))
        } else if config
            .zeta
            .is_some_and(|z| active.iter().all(|&a| 2.0 * est.widths[a] <= z))
        {
            Some((best_estimate(&active, &est.mu_hat), Termination::Zeta))
        } else if state.total_pulls() >= config.max_steps {
            Some((best_estimate(&active, &est.mu_hat), Termination::Cap))
        } else {
            None
        };
        if let Some((winner, terminated_by)) = finish {
            return Ok(RunTrace {
                steps,
                winner,
                total_pulls: state.total_pulls(),
                terminated_by,
                final_active: active,
            });
        }

        let arm = sampler.next_arm(&state, &active, graph.components())?;
        let reward = rewards.pull(arm);
        state.record_pull(arm, reward)?;
        steps.push(StepRecord {
            step: steps.len() as u64 + 1,
            arm,
            reward,
            active_count: active.len(),
            eliminated: Vec::new(),
        });
    }
}

fn best_estimate(active: &[usize], mu_hat: &[f64]) -> usize {
    argmax_lowest(active.iter().map(|&i| (i, mu_hat[i]))).expect("active set is nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize) -> ConfidenceParams {
        ConfidenceParams::new(1.0, 0.05, 0.0, n).unwrap()
    }

    #[test]
    fn huge_widths_keep_everything() {
        let (kept, removed) = eliminate_by_bounds(&[0, 1, 2], &[5.0, 0.0, -3.0], &[1e6; 3]);
        assert_eq!(kept, vec![0, 1, 2]);
        assert!(removed.is_empty());
    }

    #[test]
    fn clear_gap_eliminates() {
        let (kept, removed) = eliminate_by_bounds(&[0, 1], &[10.0, 0.0], &[1.0, 1.0]);
        assert_eq!(kept, vec![0]);
        assert_eq!(removed, vec![1]);
    }

    #[test]
    fn leader_always_retained() {
        // Leader by lower bound is arm 1 even though arm 0 has the larger estimate.
        let (kept, _) = eliminate_by_bounds(&[0, 1], &[10.0, 9.0], &[100.0, 0.1]);
        assert!(kept.contains(&1));
    }

    #[test]
    fn single_arm_terminates_after_init() {
        let g = SimilarityGraph::edgeless(1);
        let cfg = RunConfig::new(params(1), 1.0);
        let trace = grub_run(&g, &cfg, &mut |_| 0.0).unwrap();
        assert_eq!(trace.winner, 0);
        assert_eq!(trace.total_pulls, 1);
        assert_eq!(trace.terminated_by, Termination::Singleton);
    }

    #[test]
    fn init_pulls_one_per_component() {
        let g = SimilarityGraph::from_edges(5, &[(0, 1, 1.0), (3, 4, 1.0)]).unwrap();
        let mut state = DesignState::new(&g.laplacian(), 1.0).unwrap();
        let mut steps = Vec::new();
        cluster_init(&mut state, &g, &mut |_| 1.0, &mut steps).unwrap();
        let arms: Vec<usize> = steps.iter().map(|s| s.arm).collect();
        assert_eq!(arms, vec![0, 2, 3]);
        assert!(state.is_identifiable());
    }

    #[test]
    fn noiseless_two_arms() {
        let g = SimilarityGraph::edgeless(2);
        let cfg = RunConfig::new(params(2), 1.0);
        let trace = grub_run(&g, &cfg, &mut |a| if a == 0 { 100.0 } else { 0.0 }).unwrap();
        assert_eq!(trace.winner, 0);
        assert_eq!(trace.total_pulls, 2);
        assert_eq!(trace.steps[1].eliminated, vec![1]);
    }

    #[test]
    fn cap_is_flagged() {
        let g = SimilarityGraph::edgeless(2);
        let cfg = RunConfig::new(params(2), 1.0).with_max_steps(10);
        let trace = grub_run(&g, &cfg, &mut |_| 0.0).unwrap();
        assert_eq!(trace.terminated_by, Termination::Cap);
        assert_eq!(trace.total_pulls, 10);
    }

    #[test]
    fn zeta_mode_stops_immediately_with_large_zeta() {
        let g = SimilarityGraph::edgeless(3);
        let cfg = RunConfig::new(params(3), 1.0).with_zeta(1e9);
        let trace = zeta_grub_run(&g, &cfg, &mut |a| [1.0, 3.0, 2.0][a]).unwrap();
        assert_eq!(trace.terminated_by, Termination::Zeta);
        assert_eq!(trace.total_pulls, 3);
        assert_eq!(trace.winner, 1);
    }

    #[test]
    fn mode_mismatch_rejected() {
        let g = SimilarityGraph::edgeless(2);
        let cfg = RunConfig::new(params(2), 1.0);
        assert!(zeta_grub_run(&g, &cfg, &mut |_| 0.0).is_err());
        assert!(grub_run(&g, &cfg.clone().with_zeta(1.0), &mut |_| 0.0).is_err());
        assert!(grub_run(&g, &cfg.with_max_steps(1), &mut |_| 0.0).is_err());
    }
}
