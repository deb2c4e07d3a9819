use std::fs;
use std::path::{Path, PathBuf};

use grub_core::influence::InfluenceTable;
use grub_core::simgen::run_batch_on;
use grub_core::{
    classify_arms, gamma_closeness, gamma_complexity, sample_complexity, zeta_complexity,
    BoundParams, Closeness, ConfidenceParams, GraphSpec, LeadingConstants, MeanConfig, RunConfig,
    SimilarityGraph,
};
use serde::Serialize;

use crate::config::{read_graph, write_output, GraphSource, MeansSource, Settings};
use crate::error::{CliError, CliResult};
use crate::output::{num, render, Table};

fn epsilon_for(settings: &Settings, certificate: f64) -> f64 {
    let eps = settings.epsilon.unwrap_or(certificate);
    if eps + 1e-9 < certificate {
        eprintln!(
            "warning: epsilon {} is below the instance's smoothness {}",
            num(eps),
            num(certificate)
        );
    }
    eps
}

pub fn run(settings: &Settings) -> CliResult<()> {
    let (g, instance) = settings.load_instance()?;
    let (g, certificate) = if settings.no_graph {
        (SimilarityGraph::edgeless(g.n()), 0.0)
    } else {
        (g, instance.epsilon_certificate)
    };
    let params = ConfidenceParams::new(
        settings.sigma,
        settings.delta,
        epsilon_for(settings, certificate),
        g.n(),
    )?;
    let mut cfg = RunConfig::new(params, settings.rho)
        .with_policy(settings.policy)
        .with_seed(settings.seed);
    if let Some(z) = settings.zeta {
        cfg = cfg.with_zeta(z);
    }
    if let Some(m) = settings.max_steps {
        cfg = cfg.with_max_steps(m);
    }
    let batch = run_batch_on(&g, &instance, &cfg, settings.runs)?;

    let mut steps = Table::new(&["run", "step", "pulled_arm", "reward", "active_count", "eliminated"]);
    let mut summary = Table::new(&["run", "winner", "total_pulls", "terminated_by"]);
    for (r, trace) in batch.traces.iter().enumerate() {
        for s in &trace.steps {
            let eliminated: Vec<String> = s.eliminated.iter().map(usize::to_string).collect();
            steps.push(vec![
                r.to_string(),
                s.step.to_string(),
                s.arm.to_string(),
                num(s.reward),
                s.active_count.to_string(),
                eliminated.join(";"),
            ]);
        }
        summary.push(vec![
            r.to_string(),
            trace.winner.to_string(),
            trace.total_pulls.to_string(),
            trace.terminated_by.name().to_string(),
        ]);
    }
    if !batch.capped.is_empty() {
        eprintln!(
            "warning: {} run(s) stopped at the step cap; their winners carry no confidence guarantee",
            batch.capped.len()
        );
    }
    write_output(settings.out.as_deref(), &render(&[steps, summary], settings.format))
}

pub fn influence(settings: &Settings) -> CliResult<()> {
    let g = settings.load_graph()?;
    let table = InfluenceTable::build(&g, settings.rho)?;
    let mut t = Table::new(&["node", "component", "component_size", "influence"]);
    for row in table.rows() {
        t.push(vec![
            row.node.to_string(),
            row.component.to_string(),
            row.component_size.to_string(),
            num(row.influence),
        ]);
    }
    write_output(settings.out.as_deref(), &render(&[t], settings.format))
}

pub struct CandidateArgs<'a> {
    pub files: &'a [PathBuf],
    pub gammas: &'a [f64],
    pub conservative_constants: bool,
}

pub fn complexity(settings: &Settings, extra: CandidateArgs<'_>) -> CliResult<()> {
    let (g, instance) = settings.load_instance()?;
    let mu = &instance.mu;
    let epsilon = epsilon_for(settings, instance.epsilon_certificate);
    let mut params = BoundParams::new(settings.sigma, settings.delta, settings.rho, epsilon)?;
    if extra.conservative_constants {
        params = params.with_constants(LeadingConstants::CONSERVATIVE);
    }
    let table = InfluenceTable::build(&g, settings.rho)?;
    let split = classify_arms(mu, &table, &params)?;
    let report = sample_complexity(&split, &table, &params)?;

    let mut arms = Table::new(&["arm", "mean", "gap", "influence", "component", "class", "term"]);
    for j in 0..g.n() {
        arms.push(vec![
            j.to_string(),
            num(mu[j]),
            num(split.gaps[j]),
            num(table.factor(j)),
            table.component_of(j).to_string(),
            split.classes[j].symbol().to_string(),
            num(report.arm_terms[j]),
        ]);
    }
    let mut comps = Table::new(&["component", "size", "highly", "weakly"]);
    for c in &report.per_component {
        comps.push(vec![
            c.component.to_string(),
            table.components()[c.component].len().to_string(),
            num(c.highly),
            num(c.weakly),
        ]);
    }
    let mut totals = Table::new(&["quantity", "value"]);
    totals.push(vec!["k".into(), report.k.to_string()]);
    totals.push(vec!["epsilon".into(), num(epsilon)]);
    totals.push(vec!["T".into(), num(report.t_bound)]);
    if let Some(z) = settings.zeta {
        let zr = zeta_complexity(&split, &table, &params, z)?;
        totals.push(vec!["T_zeta".into(), num(zr.t_bound)]);
    }
    if extra.files.len() != extra.gammas.len() {
        return Err(CliError::Config(format!(
            "{} candidate graph(s) but {} gamma value(s)",
            extra.files.len(),
            extra.gammas.len()
        )));
    }
    if !extra.files.is_empty() {
        let candidates = extra
            .files
            .iter()
            .zip(extra.gammas)
            .map(|(p, &gamma)| Ok((read_graph(p)?, gamma)))
            .collect::<CliResult<Vec<_>>>()?;
        let gr = gamma_complexity(&g, mu, &candidates, &params)?;
        totals.push(vec!["T_gamma".into(), num(gr.t_gamma)]);
        totals.push(vec!["T_gamma_candidate".into(), gr.best_index.to_string()]);
    }
    write_output(
        settings.out.as_deref(),
        &render(&[arms, comps, totals], settings.format),
    )
}

pub fn gamma_check(settings: &Settings, against: &Path) -> CliResult<()> {
    let d = settings.load_graph()?;
    let h = read_graph(against)?;
    let mut t = Table::new(&["compatible", "gamma"]);
    match gamma_closeness(&d.laplacian(), &h.laplacian())? {
        Closeness::Gamma(g) => t.push(vec!["true".into(), num(g)]),
        Closeness::Incompatible => t.push(vec!["false".into(), String::new()]),
    }
    write_output(settings.out.as_deref(), &render(&[t], settings.format))
}

#[derive(Serialize)]
struct Manifest<'a> {
    nodes: usize,
    components: usize,
    instance_seed: u64,
    run_seed: u64,
    sigma: f64,
    epsilon_certificate: f64,
    graph_file: &'a str,
    means_file: &'a str,
    graph: Option<&'a GraphSpec>,
    means: Option<&'a MeanConfig>,
}

/// Write `graph.txt`, `means.txt` and `manifest.toml` into `dir`.
pub fn generate(settings: &Settings, dir: &Path) -> CliResult<()> {
    let (g, instance) = settings.load_instance()?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|source| CliError::Write { path, source })
    };
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    write("graph.txt", g.to_edge_list())?;
    write(
        "means.txt",
        instance.mu.iter().map(|m| format!("{m:?}\n")).collect(),
    )?;
    let manifest = Manifest {
        nodes: g.n(),
        components: g.component_count(),
        instance_seed: settings.instance_seed,
        run_seed: settings.seed,
        sigma: settings.sigma,
        epsilon_certificate: instance.epsilon_certificate,
        graph_file: "graph.txt",
        means_file: "means.txt",
        graph: match &settings.graph {
            Some(GraphSource::Spec(s)) => Some(s),
            _ => None,
        },
        means: match &settings.means {
            Some(MeansSource::Recipe(m)) => Some(m),
            _ => None,
        },
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    write("manifest.toml", text)
}
