//! Synthetic instances and seeded Monte Carlo batches.
//!
//! All randomness comes from ChaCha8 streams keyed by `(seed, purpose)`.
//! Rewards use one stream per arm, so the draws an arm produces do not depend
//! on which policy asked for them or when.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run, RewardSource, RunConfig, RunTrace, Termination};
use crate::error::{Error, Result};
use crate::graph::{smoothness, SimilarityGraph};

const STREAM_GRAPH: u64 = 1;
const STREAM_MEANS: u64 = 2;
const STREAM_REWARD_BASE: u64 = 1 << 32;

fn stream(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    /// Disjoint cliques with the given sizes, optionally preceded by an
    /// isolated node 0.
    CompleteClusters {
        sizes: Vec<usize>,
        #[serde(default)]
        isolated_optimal: bool,
    },
    /// Stochastic block model over `clusters` blocks of `size` nodes.
    Sbm {
        clusters: usize,
        size: usize,
        p: f64,
        q: f64,
        #[serde(default)]
        isolated_optimal: bool,
    },
    /// Preferential attachment from a complete core of `m` nodes.
    BarabasiAlbert { n: usize, m: usize },
    /// Node 0 joined to every other node.
    Star { n: usize },
    /// Path `0 - 1 - ... - n-1`.
    Line { n: usize },
}

impl GraphSpec {
    /// `m` cliques of `k` nodes each.
    pub fn uniform_clusters(m: usize, k: usize, isolated_optimal: bool) -> Self {
        GraphSpec::CompleteClusters {
            sizes: vec![k; m],
            isolated_optimal,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            GraphSpec::CompleteClusters {
                sizes,
                isolated_optimal,
            } => sizes.iter().sum::<usize>() + usize::from(*isolated_optimal),
            GraphSpec::Sbm {
                clusters,
                size,
                isolated_optimal,
                ..
            } => clusters * size + usize::from(*isolated_optimal),
            GraphSpec::BarabasiAlbert { n, .. } | GraphSpec::Star { n } | GraphSpec::Line { n } => *n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            GraphSpec::CompleteClusters { sizes, .. } => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return bad("complete_clusters needs at least one nonempty cluster".into());
                }
            }
            GraphSpec::Sbm {
                clusters, size, p, q, ..
            } => {
                if *clusters == 0 || *size == 0 {
                    return bad("sbm needs clusters >= 1 and size >= 1".into());
                }
                if !(0.0 <= *q && q <= p && *p <= 1.0) {
                    return bad(format!("sbm needs 0 <= q <= p <= 1, got p={p} q={q}"));
                }
            }
            GraphSpec::BarabasiAlbert { n, m } => {
                if *m == 0 || m >= n {
                    return bad(format!("barabasi_albert needs 1 <= m < n, got n={n} m={m}"));
                }
            }
            GraphSpec::Star { n } | GraphSpec::Line { n } => {
                if *n == 0 {
                    return bad("graph needs at least one node".into());
                }
            }
        }
        Ok(())
    }
}

/// Build the graph described by `spec`; all edges have unit weight.
pub fn generate_graph(spec: &GraphSpec, seed: u64) -> Result<SimilarityGraph> {
    spec.validate()?;
    let mut rng = stream(seed, STREAM_GRAPH);
    let n = spec.node_count();
    let mut edges = Vec::new();
    match spec {
        GraphSpec::CompleteClusters {
            sizes,
            isolated_optimal,
        } => {
            let mut start = usize::from(*isolated_optimal);
            for &k in sizes {
                for u in start..start + k {
                    for v in u + 1..start + k {
                        edges.push((u, v, 1.0));
                    }
                }
                start += k;
            }
        }
        GraphSpec::Sbm {
            clusters,
            size,
            p,
            q,
            isolated_optimal,
        } => {
            let offset = usize::from(*isolated_optimal);
            let m = clusters * size;
            for a in 0..m {
                for b in a + 1..m {
                    let prob = if a / size == b / size { *p } else { *q };
                    if rng.random_bool(prob) {
                        edges.push((a + offset, b + offset, 1.0));
                    }
                }
            }
        }
        GraphSpec::BarabasiAlbert { m, .. } => {
            edges = barabasi_albert(n, *m, &mut rng);
        }
        GraphSpec::Star { .. } => {
            edges.extend((1..n).map(|v| (0, v, 1.0)));
        }
        GraphSpec::Line { .. } => {
            edges.extend((1..n).map(|v| (v - 1, v, 1.0)));
        }
    }
    SimilarityGraph::from_edges(n, &edges)
}

fn barabasi_albert(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::with_capacity(m * (n - m) + m * (m - 1) / 2);
    let mut degree = vec![0usize; n];
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v, 1.0));
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    for new in m..n {
        let existing: Vec<usize> = (0..new).collect();
        // A lone core node (m = 1) starts at degree zero and must still be
        // reachable.
        let targets: Vec<usize> = existing
            .choose_multiple_weighted(rng, m, |&u| degree[u].max(1) as f64)
            .expect("weights are positive")
            .copied()
            .collect();
        for t in targets {
            edges.push((t, new, 1.0));
            degree[t] += 1;
            degree[new] += 1;
        }
    }
    edges
}

/// Recipe for a mean vector: a base level per component (in the order of
/// [`SimilarityGraph::components`]), a uniform perturbation in
/// `[-spread, spread]`, and the smoothness target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanConfig {
    pub levels: Vec<f64>,
    #[serde(default)]
    pub spread: f64,
    pub epsilon: f64,
}

/// Levels plus a perturbation rescaled by `min(1, ε / ‖μ₀‖_G)`.
pub fn generate_means(g: &SimilarityGraph, config: &MeanConfig, seed: u64) -> Result<Vec<f64>> {
    let comps = g.components();
    if config.levels.len() != comps.len() {
        return Err(Error::DimensionMismatch {
            expected: comps.len(),
            got: config.levels.len(),
        });
    }
    if !(config.epsilon >= 0.0) || !(config.spread >= 0.0) {
        return Err(Error::InvalidParameter(
            "epsilon and spread must be nonnegative".into(),
        ));
    }
    let mut rng = stream(seed, STREAM_MEANS);
    let n = g.n();
    let pert: Vec<f64> = (0..n)
        .map(|_| {
            if config.spread > 0.0 {
                rng.random_range(-config.spread..=config.spread)
            } else {
                0.0
            }
        })
        .collect();
    let norm = smoothness(&pert, &g.laplacian())?.sqrt();
    let scale = if norm > config.epsilon {
        config.epsilon / norm
    } else {
        1.0
    };
    let mut mu = vec![0.0; n];
    for (c, comp) in comps.iter().enumerate() {
        for &i in comp {
            mu[i] = config.levels[c] + scale * pert[i];
        }
    }
    Ok(mu)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BanditInstance {
    pub mu: Vec<f64>,
    pub sigma: f64,
    /// `√⟨μ, Lμ⟩` on the paired graph.
    pub epsilon_certificate: f64,
}

impl BanditInstance {
    pub fn new(g: &SimilarityGraph, mu: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
        }
        let epsilon_certificate = smoothness(&mu, &g.laplacian())?.sqrt();
        Ok(Self {
            mu,
            sigma,
            epsilon_certificate,
        })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// Index of the largest mean, or `None` when it is shared.
    pub fn best_arm(&self) -> Option<usize> {
        crate::complexity::best_arm(&self.mu).ok()
    }

    /// Reward streams for one run.
    pub fn rewards(&self, seed: u64) -> GaussianRewards {
        GaussianRewards::new(self.mu.clone(), self.sigma, seed)
    }
}

pub fn sample_reward(instance: &BanditInstance, arm: usize, rng: &mut impl Rng) -> Result<f64> {
    let mean = *instance.mu.get(arm).ok_or(Error::ArmOutOfRange {
        arm,
        n: instance.n(),
    })?;
    let z: f64 = rng.sample(StandardNormal);
    Ok(mean + instance.sigma * z)
}

/// `μ_arm + σ z` with an independent ChaCha8 stream per arm.
#[derive(Debug, Clone)]
pub struct GaussianRewards {
    mu: Vec<f64>,
    sigma: f64,
    streams: Vec<ChaCha8Rng>,
}

impl GaussianRewards {
    pub fn new(mu: Vec<f64>, sigma: f64, seed: u64) -> Self {
        let streams = (0..mu.len() as u64)
            .map(|a| stream(seed, STREAM_REWARD_BASE + a))
            .collect();
        Self { mu, sigma, streams }
    }
}

impl RewardSource for GaussianRewards {
    fn pull(&mut self, arm: usize) -> f64 {
        let z: f64 = self.streams[arm].sample(StandardNormal);
        self.mu[arm] + self.sigma * z
    }
}

/// Summary of the active-set size across runs after a given step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub step: usize,
    pub mean: f64,
    pub q10: usize,
    pub q50: usize,
    pub q90: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchResult {
    /// Trace of run `i`, seeded with `base seed + i`.
    pub traces: Vec<RunTrace>,
    pub curve: Vec<CurvePoint>,
    /// Runs that stopped at the step cap.
    pub capped: Vec<usize>,
}

/// Generate graph and means from `config.seed`, then run `n_runs` times.
pub fn run_batch(
    spec: &GraphSpec,
    means: &MeanConfig,
    sigma: f64,
    config: &RunConfig,
    n_runs: usize,
) -> Result<BatchResult> {
    let g = generate_graph(spec, config.seed)?;
    let mu = generate_means(&g, means, config.seed)?;
    let instance = BanditInstance::new(&g, mu, sigma)?;
    run_batch_on(&g, &instance, config, n_runs)
}

/// Run `n_runs` seeded copies on a fixed instance, in parallel.
pub fn run_batch_on(
    g: &SimilarityGraph,
    instance: &BanditInstance,
    config: &RunConfig,
    n_runs: usize,
) -> Result<BatchResult> {
    if n_runs == 0 {
        return Err(Error::InvalidParameter("n_runs must be >= 1".into()));
    }
    if instance.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: instance.n(),
        });
    }
    let traces = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i as u64);
            let cfg = RunConfig {
                seed,
                ..config.clone()
            };
            run(g, &cfg, &mut instance.rewards(seed))
        })
        .collect::<Result<Vec<_>>>()?;
    let capped = (0..n_runs)
        .filter(|&i| traces[i].terminated_by == Termination::Cap)
        .collect();
    let curve = aggregate_curves(&traces.iter().map(|t| t.active_curve()).collect::<Vec<_>>());
    Ok(BatchResult {
        traces,
        curve,
        capped,
    })
}

/// Per-step mean and nearest-rank quantiles; a finished run keeps its last
/// value.
pub fn aggregate_curves(curves: &[Vec<usize>]) -> Vec<CurvePoint> {
    let len = curves.iter().map(Vec::len).max().unwrap_or(0);
    let runs = curves.len();
    let quantile = |sorted: &[usize], q: f64| {
        let rank = ((q * runs as f64).ceil() as usize).clamp(1, runs);
        sorted[rank - 1]
    };
    (0..len)
        .map(|s| {
            let mut vals: Vec<usize> = curves
                .iter()
                .map(|c| c.get(s).or(c.last()).copied().unwrap_or(0))
                .collect();
            vals.sort_unstable();
            let total: usize = vals.iter().sum();
            CurvePoint {
                step: s + 1,
                mean: total as f64 / runs as f64,
                q10: quantile(&vals, 0.1),
                q50: quantile(&vals, 0.5),
                q90: quantile(&vals, 0.9),
            }
        })
        .collect()
}
