//! Flag / config-file merging and input loading.
//!
//! Every setting is looked up on the command line first, then in the TOML
//! file given by `--config`, then falls back to a default. Relative paths in
//! the file are resolved against the file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use grub_core::{
    generate_graph, generate_means, BanditInstance, GraphSpec, MeanConfig, PolicyKind,
    SimilarityGraph,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::output::Format;

/// Flags shared by every subcommand. Unset flags fall through to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// TOML file supplying defaults for any flag below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Edge-list file: `n <N>` then one `u v w` line per edge.
    #[arg(long, global = true)]
    pub graph: Option<PathBuf>,
    /// Mean-vector file: one decimal per line.
    #[arg(long, global = true)]
    pub means: Option<PathBuf>,
    /// cyclic, valko, maxdiff, mintrace, mindet or jvmo.
    #[arg(long, global = true)]
    pub policy: Option<String>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Smoothness bound; defaults to the instance's own `√⟨μ, Lμ⟩`.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Switch to ζ-best-arm mode.
    #[arg(long, global = true)]
    pub zeta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    #[arg(long, global = true)]
    pub max_steps: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// Generated instance recipe, as an alternative to graph and means files.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    #[serde(default)]
    pub seed: u64,
    pub graph: Option<GraphSpec>,
    pub means: Option<MeanConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub graph: Option<PathBuf>,
    pub means: Option<PathBuf>,
    pub policy: Option<PolicyKind>,
    pub rho: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub zeta: Option<f64>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub max_steps: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub no_graph: Option<bool>,
    pub instance: Option<InstanceSection>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_text(path)?;
        let mut cfg: FileConfig = toml::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.graph, &mut cfg.means, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

pub enum GraphSource {
    File(PathBuf),
    Spec(GraphSpec),
}

pub enum MeansSource {
    File(PathBuf),
    Recipe(MeanConfig),
}

/// Fully merged settings for one invocation.
pub struct Settings {
    pub graph: Option<GraphSource>,
    pub means: Option<MeansSource>,
    pub instance_seed: u64,
    pub policy: PolicyKind,
    pub rho: f64,
    pub epsilon: Option<f64>,
    pub delta: f64,
    pub sigma: f64,
    pub zeta: Option<f64>,
    pub seed: u64,
    pub runs: usize,
    pub max_steps: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub no_graph: bool,
}

pub const DEFAULT_RHO: f64 = 1.0;
pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_SIGMA: f64 = 1.0;

impl Settings {
    pub fn resolve(opts: &Opts, no_graph_flag: bool) -> CliResult<Self> {
        let file = match &opts.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let instance = file.instance.clone();
        let graph = match (&opts.graph, &file.graph, instance.as_ref().and_then(|i| i.graph.clone())) {
            (Some(p), _, _) => Some(GraphSource::File(p.clone())),
            (None, Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "config gives both a graph file and an instance graph".into(),
                ))
            }
            (None, Some(p), None) => Some(GraphSource::File(p.clone())),
            (None, None, Some(spec)) => Some(GraphSource::Spec(spec)),
            (None, None, None) => None,
        };
        let means = match (&opts.means, &file.means, instance.as_ref().and_then(|i| i.means.clone())) {
            (Some(p), _, _) => Some(MeansSource::File(p.clone())),
            (None, Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "config gives both a means file and instance means".into(),
                ))
            }
            (None, Some(p), None) => Some(MeansSource::File(p.clone())),
            (None, None, Some(m)) => Some(MeansSource::Recipe(m)),
            (None, None, None) => None,
        };
        let policy = match &opts.policy {
            Some(s) => s.parse()?,
            None => file.policy.unwrap_or(PolicyKind::Cyclic),
        };
        let settings = Settings {
            graph,
            means,
            instance_seed: instance.map_or(0, |i| i.seed),
            policy,
            rho: opts.rho.or(file.rho).unwrap_or(DEFAULT_RHO),
            epsilon: opts.epsilon.or(file.epsilon),
            delta: opts.delta.or(file.delta).unwrap_or(DEFAULT_DELTA),
            sigma: opts.sigma.or(file.sigma).unwrap_or(DEFAULT_SIGMA),
            zeta: opts.zeta.or(file.zeta),
            seed: opts.seed.or(file.seed).unwrap_or(0),
            runs: opts.runs.or(file.runs).unwrap_or(1),
            max_steps: opts.max_steps.or(file.max_steps),
            out: opts.out.clone().or(file.out),
            format: opts.format.or(file.format).unwrap_or(Format::Csv),
            no_graph: no_graph_flag || file.no_graph.unwrap_or(false),
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> CliResult<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be a positive number, got {v}")))
            }
        };
        positive("rho", self.rho)?;
        positive("sigma", self.sigma)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CliError::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if let Some(e) = self.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(CliError::Config(format!("epsilon must be >= 0, got {e}")));
            }
        }
        if let Some(z) = self.zeta {
            if !(z >= 0.0 && z.is_finite()) {
                return Err(CliError::Config(format!("zeta must be >= 0, got {z}")));
            }
        }
        if self.runs == 0 {
            return Err(CliError::Config("runs must be >= 1".into()));
        }
        Ok(())
    }

    pub fn load_graph(&self) -> CliResult<SimilarityGraph> {
        match &self.graph {
            Some(GraphSource::File(p)) => read_graph(p),
            Some(GraphSource::Spec(spec)) => Ok(generate_graph(spec, self.instance_seed)?),
            None => Err(CliError::Config("no graph given (use --graph or a config file)".into())),
        }
    }

    pub fn load_means(&self, g: &SimilarityGraph) -> CliResult<Vec<f64>> {
        let mu = match &self.means {
            Some(MeansSource::File(p)) => read_means(p)?,
            Some(MeansSource::Recipe(m)) => generate_means(g, m, self.instance_seed)?,
            None => return Err(CliError::Config("no means given (use --means or a config file)".into())),
        };
        if mu.len() != g.n() {
            return Err(CliError::Config(format!(
                "means has {} entries but the graph has {} nodes",
                mu.len(),
                g.n()
            )));
        }
        Ok(mu)
    }

    /// Graph, means and the instance's smoothness certificate.
    pub fn load_instance(&self) -> CliResult<(SimilarityGraph, BanditInstance)> {
        let g = self.load_graph()?;
        let mu = self.load_means(&g)?;
        let instance = BanditInstance::new(&g, mu, self.sigma)?;
        Ok((g, instance))
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_graph(path: &Path) -> CliResult<SimilarityGraph> {
    let text = read_text(path)?;
    SimilarityGraph::parse_edge_list(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_means(path: &Path) -> CliResult<Vec<f64>> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Parse {
                    path: path.to_path_buf(),
                    message: format!("line {}: expected a finite decimal, got {l:?}", i + 1),
                })
        })
        .collect()
}

pub fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}
