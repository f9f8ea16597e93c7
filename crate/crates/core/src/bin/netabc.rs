use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use netabc::abc::posterior_stats;
use netabc::graph::write_edge_list;
use netabc::harness::experiment::{accept, fill_seed, observed_seed, observed_summary_seed, standardization, table_path};
use netabc::harness::timing::write_timing_csv;
use netabc::harness::{
    build_reference_table, ingest_observed, read_table_csv, run_experiment, seed_graph, simulate_observed,
    timing_report, RunConfig,
};
use netabc::rng::entry_rng;
use netabc::summaries::evaluate_all;
use netabc::{Error, Result};

#[derive(Parser)]
#[command(name = "netabc", about = "ABC for growing network models with extrapolated summaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set b=200`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Write the seed graph as an edge list.
    SeedGen(Common),
    /// Build (or resume) the reference table of each configured method.
    BuildTable(Common),
    /// Accept against an existing table for one observed network.
    AbcRun(Common),
    /// Replicated simulation study.
    Experiment(Common),
    /// Per-entry and observed-summary timings.
    Timing(Common),
    /// Load `observed_path` and report its summaries.
    Ingest(Common),
}

fn load(c: &Common) -> Result<RunConfig> {
    let base = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = base.with_overrides(&c.overrides)?;
    fs::create_dir_all(&c.out)?;
    Ok(cfg)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    Ok(())
}

fn seed_gen(c: &Common) -> Result<()> {
    let cfg = load(c)?;
    let g = seed_graph(&cfg)?;
    write_edge_list(&g, BufWriter::new(File::create(c.out.join("seed.edgelist"))?))?;
    println!("seed nodes={} edges={} triangles={}", g.node_count(), g.edge_count(), g.triangle_count());
    Ok(())
}

fn build_table(c: &Common) -> Result<()> {
    let cfg = load(c)?;
    let seed = seed_graph(&cfg)?;
    for &m in &cfg.methods {
        let path = table_path(&c.out, m);
        let built = build_reference_table(&cfg, m, &seed, Some(&path))?;
        println!("{m}: rows={} failed={} -> {}", built.table.len(), built.failures.len(), path.display());
    }
    Ok(())
}

fn abc_run(c: &Common) -> Result<()> {
    let cfg = load(c)?;
    let method = cfg.method();
    let path = table_path(&c.out, method);
    if !path.exists() {
        return Err(Error::Config(format!("no table at {}; run build-table first", path.display())));
    }
    let (table, _) = read_table_csv(&path)?;
    let specs = cfg.summary_specs(method)?;
    let seed = seed_graph(&cfg)?;
    let mut rng = entry_rng(observed_summary_seed(&cfg, 0));
    let (observed, truth) = match &cfg.observed_path {
        Some(p) => (ingest_observed(p, None, &specs, cfg.model.directed(), &mut rng)?.summaries, None),
        None => {
            let truth = cfg.truths.first().ok_or_else(|| Error::Config("no observed_path and no truths".into()))?;
            let g = simulate_observed(&cfg, &seed, truth, observed_seed(&cfg, 0))?;
            (evaluate_all(&specs, &g, &mut rng)?, Some(truth.clone()))
        }
    };
    let sds = if method.uses_density() { None } else { Some(standardization(&cfg, method, &table, &seed)?) };
    let post = accept(&cfg, method, &table, &observed, sds.as_ref(), fill_seed(&cfg, 0))?;
    let stats = posterior_stats(&post, truth.as_deref())?;
    post.write_csv(&table.theta_names, BufWriter::new(File::create(c.out.join("posterior.csv"))?))?;
    write_json(
        &c.out.join("stats.json"),
        &json!({ "method": method, "observed": observed, "sds": sds.map(|s| s.values), "stats": stats }),
    )?;
    println!("{method}: accepted={} mean={:?} zero_fills={}", stats.k, stats.mean, stats.zero_fills);
    Ok(())
}

fn experiment(c: &Common) -> Result<()> {
    let cfg = load(c)?;
    let report = run_experiment(&cfg, Some(&c.out))?;
    for r in &report.report {
        println!(
            "{} truth={} {}: mean={:.5} sd={:.5} rmse={:.5}",
            r.method, r.truth_index, r.parameter, r.mean_of_means, r.sd, r.rmse
        );
    }
    Ok(())
}

fn timing(c: &Common) -> Result<()> {
    let cfg = load(c)?;
    let rows = timing_report(&cfg)?;
    write_timing_csv(&rows, BufWriter::new(File::create(c.out.join("timing.csv"))?))?;
    println!("{} timing rows", rows.len());
    Ok(())
}

fn ingest(c: &Common) -> Result<()> {
    let cfg = load(c)?;
    let path = cfg.observed_path.clone().ok_or_else(|| Error::Config("observed_path not set".into()))?;
    let method = cfg.method();
    let specs = cfg.summary_specs(method)?;
    let mut rng = entry_rng(observed_summary_seed(&cfg, 0));
    let obs = ingest_observed(&path, cfg.seed_cutoff, &specs, cfg.model.directed(), &mut rng)?;
    let names: Vec<&str> = specs.iter().map(|s| s.name()).collect();
    write_json(
        &c.out.join("observed.json"),
        &json!({
            "path": path,
            "nodes": obs.graph.node_count(),
            "edges": obs.graph.edge_count(),
            "skipped_edges": obs.skipped_edges,
            "seed_nodes": obs.seed_nodes.as_ref().map(Vec::len),
            "summary_names": names,
            "summaries": obs.summaries,
        }),
    )?;
    if obs.seed_nodes.is_some() {
        write_edge_list(&obs.seed_graph()?, BufWriter::new(File::create(c.out.join("seed.edgelist"))?))?;
    }
    println!("nodes={} edges={} summaries={:?}", obs.graph.node_count(), obs.graph.edge_count(), obs.summaries);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::SeedGen(c) => seed_gen(c),
        Command::BuildTable(c) => build_table(c),
        Command::AbcRun(c) => abc_run(c),
        Command::Experiment(c) => experiment(c),
        Command::Timing(c) => timing(c),
        Command::Ingest(c) => ingest(c),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::FAILURE
        }
    }
}
