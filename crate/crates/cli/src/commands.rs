//! Subcommand bodies. Every command is deterministic given its seed
//! inputs; nothing here reads clocks or ambient randomness.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use fairspread_core::graph::group_connectivity;
use fairspread_core::synth::generate;
use fairspread_core::{
    agm_gs, agm_us, bound_report, evaluate, global_imm, myopic, naive_greedy, price_of_fairness,
    run_igm, write_csv, Error, EvalReport, ExactOracle, Graph, GroupStructure, NodeId, Result,
    SeedSet, SynthSpec,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, GraphSource, Method, Resolved};

/// Prints one line, treating a closed stdout (downstream `head`, etc.) as
/// success instead of panicking.
fn say(line: impl std::fmt::Display) -> Result<()> {
    use std::io::ErrorKind;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn with_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Data(format!("{}: {io}", path.display())),
        Error::Parse { line, message } => {
            Error::Parse { line, message: format!("{}: {message}", path.display()) }
        }
        other => other,
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?,
    ))
}

fn load_files(
    edge_file: &Path,
    group_file: Option<&Path>,
    directed: bool,
) -> Result<(Graph, GroupStructure)> {
    let g = with_file(edge_file, Graph::from_edge_list(open(edge_file)?, directed))?;
    let c = match group_file {
        Some(path) => with_file(path, GroupStructure::from_reader(open(path)?, &g))?,
        None => GroupStructure::single(g.node_count()),
    };
    Ok((g, c))
}

fn load_source(source: &GraphSource) -> Result<(Graph, GroupStructure)> {
    match source {
        GraphSource::Files { edge_file, group_file, directed } => {
            load_files(edge_file, group_file.as_deref(), *directed)
        }
        GraphSource::Synth(spec) => generate(spec),
    }
}

fn resolve_seed_labels(g: &Graph, labels: &[String]) -> Result<Vec<NodeId>> {
    let mut nodes = Vec::with_capacity(labels.len());
    for label in labels {
        let v = g
            .node_by_label(label)
            .ok_or_else(|| Error::InvalidParam(format!("unknown node '{label}'")))?;
        if nodes.contains(&v) {
            return Err(Error::InvalidParam(format!("seed '{label}' listed twice")));
        }
        nodes.push(v);
    }
    if nodes.is_empty() {
        return Err(Error::InvalidParam("at least one seed is required".into()));
    }
    Ok(nodes)
}

fn stem_with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: &'a ExperimentConfig,
    results: &'a [EvalReport],
}

pub fn run(cfg: &Resolved) -> Result<()> {
    let (mut g, c) = load_source(&cfg.source)?;
    if !g.probabilities_assigned() {
        g.assign_wc_probabilities();
    }
    for &k in &cfg.budgets {
        if k == 0 || k > g.node_count() {
            return Err(Error::InvalidParam(format!("budget {k} outside 1..={}", g.node_count())));
        }
    }
    let needs_pools = cfg.methods.iter().any(|m| m.needs_pools());
    let mut results: Vec<EvalReport> = Vec::new();
    for &k in &cfg.budgets {
        let igm = if needs_pools {
            Some(run_igm(&g, &c, k, &cfg.params, cfg.master_seed)?)
        } else {
            None
        };
        let igm = igm.as_ref();
        let mut block: Vec<EvalReport> = Vec::new();
        for &method in &cfg.methods {
            let report = match method {
                Method::Imm => {
                    let sel = global_imm(&g, k, &cfg.params, cfg.master_seed)?;
                    evaluate(&g, &c, &sel.seeds, cfg.r_eval, cfg.master_seed, method.label())?
                }
                Method::Myopic => {
                    let sel = myopic(&g, k, cfg.r_myopic, cfg.master_seed)?;
                    evaluate(&g, &c, &sel.seeds, cfg.r_eval, cfg.master_seed, method.label())?
                }
                Method::Greedy => {
                    let igm = igm.expect("pools exist for pool-consuming methods");
                    let sel = naive_greedy(&igm.pools, k)?;
                    evaluate(&g, &c, &sel.seeds, cfg.r_eval, cfg.master_seed, method.label())?
                }
                Method::AgmUs | Method::AgmGs => {
                    let igm = igm.expect("pools exist for pool-consuming methods");
                    let sel = match method {
                        Method::AgmUs => agm_us(&igm.matrix, &igm.pools, k)?,
                        _ => agm_gs(&igm.matrix, &igm.pools, k)?,
                    };
                    let mut report =
                        evaluate(&g, &c, &sel.seeds, cfg.r_eval, cfg.master_seed, method.label())?;
                    report.k_prime = Some(sel.diagnostics.k_prime);
                    report.floors = Some(bound_report(
                        &sel.diagnostics,
                        c.group_count(),
                        k,
                        cfg.params.epsilon,
                    ));
                    report
                }
            };
            block.push(report);
        }
        // Price of fairness against this budget's spread-optimal baseline;
        // the matched evaluation seed makes the self-comparison exactly 0.
        if let Some(base) = block.iter().find(|r| r.method == "imm").map(|r| r.sigma.mean) {
            for report in &mut block {
                report.pof = Some(price_of_fairness(base, report.sigma.mean)?);
            }
        }
        results.extend(block);
    }

    let csv_path = stem_with_extension(&cfg.output, "csv");
    let mut csv = BufWriter::new(File::create(&csv_path)?);
    write_csv(&mut csv, &results)?;
    csv.flush()?;

    let json_path = stem_with_extension(&cfg.output, "json");
    let mut json = BufWriter::new(File::create(&json_path)?);
    serde_json::to_writer_pretty(&mut json, &RunReport { config: &cfg.echo, results: &results })
        .map_err(|e| Error::Data(format!("report serialization: {e}")))?;
    json.write_all(b"\n")?;
    json.flush()?;

    say(format_args!("wrote {}", csv_path.display()))?;
    say(format_args!("wrote {}", json_path.display()))?;
    Ok(())
}

pub fn synth(spec: &SynthSpec, out: &Path) -> Result<()> {
    let (g, c) = generate(spec)?;
    if g.edge_count() == 0 {
        return Err(Error::Data(
            "specification produced a graph with no edges; raise p_in, p_out, or the sizes".into(),
        ));
    }
    let edge_path = stem_with_extension(out, "edges");
    let mut edges = BufWriter::new(File::create(&edge_path)?);
    for e in g.edges() {
        writeln!(edges, "{} {}", g.label(e.source), g.label(e.target))?;
    }
    edges.flush()?;
    // The edge-list format cannot express isolated nodes, so the group file
    // covers exactly the nodes the edge file defines; the summary describes
    // the written files, not the raw draw.
    let connected: Vec<NodeId> = (0..g.node_count())
        .filter(|&v| !g.out_edges(v).is_empty() || !g.in_edges(v).is_empty())
        .collect();
    let group_path = stem_with_extension(out, "groups");
    let mut groups = BufWriter::new(File::create(&group_path)?);
    for &v in &connected {
        writeln!(groups, "{} {}", g.label(v), c.label(c.group_of(v)))?;
    }
    groups.flush()?;
    let stats = group_connectivity(&g, &c)?;
    say(format_args!("wrote {}", edge_path.display()))?;
    say(format_args!("wrote {}", group_path.display()))?;
    say(format_args!("nodes {} edges {}", connected.len(), g.edge_count()))?;
    let isolated = g.node_count() - connected.len();
    if isolated > 0 {
        say(format_args!("dropped {isolated} isolated nodes (not expressible in an edge list)"))?;
    }
    say(format_args!("rho {:.6}", stats.rho))?;
    Ok(())
}

pub fn oracle(
    edge_file: &Path,
    group_file: Option<&Path>,
    directed: bool,
    seed_labels: &[String],
) -> Result<()> {
    let (mut g, c) = load_files(edge_file, group_file, directed)?;
    if !g.probabilities_assigned() {
        g.assign_wc_probabilities();
    }
    let seeds = resolve_seed_labels(&g, seed_labels)?;
    let oracle = ExactOracle::new(&g)?;
    say(format_args!("sigma {:.6}", oracle.sigma(&seeds).value))?;
    say(format_args!("phi {:.6}", oracle.phi(&c, &seeds).value))?;
    for gi in 0..c.group_count() {
        say(format_args!("utility {} {:.6}", c.label(gi), oracle.utility(&c, gi, &seeds).value))?;
    }
    say(format_args!("enumeration {}", oracle.enumeration_size()))?;
    Ok(())
}

pub fn rho(edge_file: &Path, group_file: &Path, directed: bool) -> Result<()> {
    let (g, c) = load_files(edge_file, Some(group_file), directed)?;
    let stats = group_connectivity(&g, &c)?;
    say(format_args!("rho {:.6}", stats.rho))?;
    say(format_args!("groups {}", c.group_count()))?;
    say(format_args!(
        "edges {} inner {} cross {}",
        stats.edge_count, stats.inner_edge_count, stats.cross_edge_count
    ))?;
    Ok(())
}

pub fn eval(
    edge_file: &Path,
    group_file: Option<&Path>,
    directed: bool,
    seed_labels: &[String],
    r: usize,
    master_seed: u64,
) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidParam("r must be at least 1".into()));
    }
    let (mut g, c) = load_files(edge_file, group_file, directed)?;
    if !g.probabilities_assigned() {
        g.assign_wc_probabilities();
    }
    let nodes = resolve_seed_labels(&g, seed_labels)?;
    let budget = nodes.len();
    let seeds = SeedSet::from_nodes(nodes, budget)?;
    let report = evaluate(&g, &c, &seeds, r, master_seed, "eval")?;
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Data(format!("report serialization: {e}")))?;
    say(format_args!("{text}"))?;
    Ok(())
}
