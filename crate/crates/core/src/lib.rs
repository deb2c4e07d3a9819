//! Best-arm identification with graph side information.
//!
//! Arms are nodes of a weighted similarity graph whose Laplacian regularizes
//! the mean estimate. [`engine::grub_run`] eliminates arms with
//! graph-tightened confidence intervals. [`influence`] and [`complexity`]
//! quantify how much the graph helps, and [`simgen`] produces synthetic
//! instances for experiments.
//!
//! ```
//! use grub_core::simgen::BanditInstance;
//! use grub_core::{grub_run, ConfidenceParams, PolicyKind, RunConfig, SimilarityGraph};
//!
//! # fn main() -> grub_core::Result<()> {
//! let g = SimilarityGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)])?;
//! let inst = BanditInstance::new(&g, vec![1.0, 0.9, 0.2, 0.1], 0.5)?;
//! let params = ConfidenceParams::new(0.5, 0.05, inst.epsilon_certificate, g.n())?;
//! let cfg = RunConfig::new(params, 1.0).with_policy(PolicyKind::Valko).with_seed(7);
//! let trace = grub_run(&g, &cfg, &mut inst.rewards(7))?;
//! assert_eq!(trace.winner, 0);
//! # Ok(())
//! # }
//! ```

pub mod complexity;
pub mod engine;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod influence;
pub mod linalg;
pub mod policy;
pub mod simgen;

pub use complexity::{
    classify_arms, gamma_complexity, improvement_ratio, sample_complexity, zeta_complexity,
    ArmClass, BoundParams, CompetitiveSplit, ComplexityReport, LeadingConstants,
};
pub use engine::{grub_run, zeta_grub_run, RewardSource, RunConfig, RunTrace, Termination};
pub use error::{Error, Result};
pub use estimator::{ConfidenceParams, DesignState};
pub use graph::{gamma_closeness, smoothness, Closeness, Laplacian, SimilarityGraph};
pub use influence::{influence_factor, k_matrix, InfluenceTable};
pub use policy::{PolicyKind, Sampler};
pub use simgen::{generate_graph, generate_means, BanditInstance, GraphSpec, MeanConfig};
