//! Replicated simulation study: tables, observed networks, acceptance and
//! the SD / RMSE report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::observed::{seed_graph, simulate_observed};
use super::table::{build_reference_table, grow_model, TableBuild};
use crate::abc::{
    accept_top_k_density, accept_top_k_distance, draw_prior, posterior_stats, standardization_sds, AbcPosterior,
    Method, PosteriorStats, ReferenceTable, Sds, Standardization,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{entry_rng, mix, splitmix64};
use crate::summaries::{evaluate_all, SummarySpec};

// Separate seed streams so that observed networks, auxiliary simulations and
// random fills never reuse a table entry's stream.
const OBSERVED_DOMAIN: u64 = 0x6f62_7365_7276_6564;
const SUMMARY_DOMAIN: u64 = 0x7375_6d6d_6172_7973;
const FILL_DOMAIN: u64 = 0x6669_6c6c_7a65_726f;
const AUX_DOMAIN: u64 = 0x6175_7869_6c69_6172;

fn domain(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ tag)
}

/// Seed of observed network `index` (0-based over truths × replicates).
pub fn observed_seed(cfg: &RunConfig, index: u64) -> u64 {
    mix(domain(cfg.master_seed, OBSERVED_DOMAIN), index)
}

/// Seed of the stream used for sampled summaries of observed network `index`.
pub fn observed_summary_seed(cfg: &RunConfig, index: u64) -> u64 {
    mix(domain(cfg.master_seed, SUMMARY_DOMAIN), index)
}

/// Seed of the stream that draws zero-density fills for run `index`.
pub fn fill_seed(cfg: &RunConfig, index: u64) -> u64 {
    mix(domain(cfg.master_seed, FILL_DOMAIN), index)
}

/// Summaries of `aux_count` prior-predictive networks grown to `n_o`.
pub fn auxiliary_summaries(cfg: &RunConfig, specs: &[SummarySpec], seed: &Graph) -> Result<Vec<Vec<f64>>> {
    let base = domain(cfg.master_seed, AUX_DOMAIN);
    (1..=cfg.aux_count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = entry_rng(mix(base, i));
            let theta = draw_prior(&cfg.prior, &mut rng);
            let g = grow_model(cfg, seed, &theta, cfg.n_o, vec![cfg.n_o], specs.to_vec(), &mut rng)?;
            Ok(g.series.values[0].clone())
        })
        .collect()
}

/// Standard deviations used by the distance methods.
pub fn standardization(cfg: &RunConfig, method: Method, table: &ReferenceTable, seed: &Graph) -> Result<Sds> {
    match cfg.standardization {
        Standardization::Extrapolated => standardization_sds(Standardization::Extrapolated, &table.summaries()),
        Standardization::Auxiliary => {
            let aux = auxiliary_summaries(cfg, &cfg.summary_specs(method)?, seed)?;
            standardization_sds(Standardization::Auxiliary, &aux)
        }
    }
}

/// Runs the acceptance step of `method` for one observed summary vector.
pub fn accept(
    cfg: &RunConfig,
    method: Method,
    table: &ReferenceTable,
    observed: &[f64],
    sds: Option<&Sds>,
    fill_rng_seed: u64,
) -> Result<AbcPosterior> {
    let post = if method.uses_density() {
        accept_top_k_density(table, observed, cfg.k, method.inflate(), &mut entry_rng(fill_rng_seed))?
    } else {
        let sds = sds.ok_or_else(|| Error::InvalidInput("distance methods need standard deviations".into()))?;
        accept_top_k_distance(table, observed, &sds.values, cfg.k)?
    };
    Ok(post.with_method(method))
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub config_hash: String,
    pub table_size: usize,
    pub failed_entries: usize,
    pub sds: Option<Vec<f64>>,
    pub sds_zero_replaced: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub method: Method,
    pub truth_index: usize,
    pub replicate: usize,
    pub observed: Vec<f64>,
    pub stats: PosteriorStats,
}

/// Per (method, truth, parameter): spread and error of the replicate
/// posterior means. `sd` uses divisor `R`, so `rmse² = sd² + bias²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: Method,
    pub truth_index: usize,
    pub parameter: String,
    pub truth: f64,
    pub mean_of_means: f64,
    pub sd: f64,
    pub bias: f64,
    pub rmse: f64,
    pub replicates: usize,
    pub zero_fills: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub theta_names: Vec<String>,
    pub truths: Vec<Vec<f64>>,
    pub methods: Vec<MethodSummary>,
    pub runs: Vec<RunRecord>,
    #[serde(skip)]
    pub posteriors: Vec<AbcPosterior>,
    pub report: Vec<ReportRow>,
}

impl ExperimentReport {
    /// Average posterior mean of parameter `j` for `method` and truth `t`.
    pub fn mean_of_means(&self, method: Method, t: usize, j: usize) -> Option<f64> {
        let name = &self.theta_names[j];
        self.report
            .iter()
            .find(|r| r.method == method && r.truth_index == t && &r.parameter == name)
            .map(|r| r.mean_of_means)
    }
}

/// Reduces replicate posterior means to one report row per parameter.
pub fn summarize_means(
    method: Method,
    truth_index: usize,
    theta_names: &[String],
    truth: &[f64],
    means: &[Vec<f64>],
    zero_fills: usize,
) -> Vec<ReportRow> {
    let r = means.len() as f64;
    theta_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col: Vec<f64> = means.iter().map(|m| m[j]).collect();
            let avg = col.iter().sum::<f64>() / r;
            let sd = (col.iter().map(|x| (x - avg).powi(2)).sum::<f64>() / r).sqrt();
            let bias = avg - truth[j];
            ReportRow {
                method,
                truth_index,
                parameter: name.clone(),
                truth: truth[j],
                mean_of_means: avg,
                sd,
                bias,
                rmse: (sd * sd + bias * bias).sqrt(),
                replicates: means.len(),
                zero_fills,
            }
        })
        .collect()
}

/// Table file for `method` inside `dir`.
pub fn table_path(dir: &Path, method: Method) -> std::path::PathBuf {
    dir.join(format!("table_{method}.csv"))
}

/// Runs every configured method against `truths × replicate_count` simulated
/// observed networks. With `out`, tables and result files are written there.
pub fn run_experiment(cfg: &RunConfig, out: Option<&Path>) -> Result<ExperimentReport> {
    if cfg.truths.is_empty() || cfg.replicate_count == 0 {
        return Err(Error::Config("experiment needs truths and replicate_count ≥ 1".into()));
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let seed = seed_graph(cfg)?;
    let reps = cfg.replicate_count;
    let observed_graphs: Vec<Graph> = (0..cfg.truths.len() * reps)
        .into_par_iter()
        .map(|i| simulate_observed(cfg, &seed, &cfg.truths[i / reps], observed_seed(cfg, i as u64)))
        .collect::<Result<_>>()?;

    let theta_names = cfg.theta_names();
    let mut report = ExperimentReport {
        theta_names: theta_names.clone(),
        truths: cfg.truths.clone(),
        methods: Vec::new(),
        runs: Vec::new(),
        posteriors: Vec::new(),
        report: Vec::new(),
    };
    // Auxiliary SDs depend only on the summary specs, so methods share them.
    let mut sds_cache: Vec<(Vec<SummarySpec>, Sds)> = Vec::new();

    for &method in &cfg.methods {
        let path = out.map(|d| table_path(d, method));
        let TableBuild { table, failures, .. } = build_reference_table(cfg, method, &seed, path.as_deref())?;
        if table.len() < cfg.k {
            return Err(Error::KTooLarge { k: cfg.k, size: table.len() });
        }
        let specs = cfg.summary_specs(method)?;
        let sds = if method.uses_density() {
            None
        } else if cfg.standardization == Standardization::Auxiliary {
            match sds_cache.iter().find(|(s, _)| *s == specs) {
                Some((_, sds)) => Some(sds.clone()),
                None => {
                    let sds = standardization(cfg, method, &table, &seed)?;
                    sds_cache.push((specs.clone(), sds.clone()));
                    Some(sds)
                }
            }
        } else {
            Some(standardization(cfg, method, &table, &seed)?)
        };

        let runs: Vec<(RunRecord, AbcPosterior)> = observed_graphs
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                let observed = evaluate_all(&specs, g, &mut entry_rng(observed_summary_seed(cfg, i as u64)))?;
                let post = accept(cfg, method, &table, &observed, sds.as_ref(), fill_seed(cfg, i as u64))?;
                let truth = &cfg.truths[i / reps];
                let stats = posterior_stats(&post, Some(truth))?;
                Ok((RunRecord { method, truth_index: i / reps, replicate: i % reps, observed, stats }, post))
            })
            .collect::<Result<_>>()?;

        for (t, truth) in cfg.truths.iter().enumerate() {
            let block = &runs[t * reps..(t + 1) * reps];
            let means: Vec<Vec<f64>> = block.iter().map(|(r, _)| r.stats.mean.clone()).collect();
            let fills = block.iter().map(|(r, _)| r.stats.zero_fills).sum();
            report.report.extend(summarize_means(method, t, &theta_names, truth, &means, fills));
        }
        report.methods.push(MethodSummary {
            method,
            config_hash: cfg.table_hash(method),
            table_size: table.len(),
            failed_entries: failures.len(),
            sds: sds.as_ref().map(|s| s.values.clone()),
            sds_zero_replaced: sds.as_ref().is_some_and(|s| s.zero_replaced),
        });
        for (r, p) in runs {
            report.runs.push(r);
            report.posteriors.push(p);
        }
    }

    if let Some(dir) = out {
        write_posteriors(&report, File::create(dir.join("posteriors.csv"))?)?;
        write_stats_json(&report, File::create(dir.join("stats.json"))?)?;
        write_report_csv(&report.report, File::create(dir.join("report.csv"))?)?;
    }
    Ok(report)
}

/// One row per accepted entry of every run.
pub fn write_posteriors<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(out));
    let mut header: Vec<String> =
        ["method", "truth_index", "replicate", "rank", "entry_id"].iter().map(|s| s.to_string()).collect();
    header.extend(report.theta_names.iter().cloned());
    header.push("score".into());
    w.write_record(&header)?;
    for (run, post) in report.runs.iter().zip(&report.posteriors) {
        for (rank, a) in post.accepted.iter().enumerate() {
            let mut row = vec![
                run.method.to_string(),
                run.truth_index.to_string(),
                run.replicate.to_string(),
                (rank + 1).to_string(),
                a.entry_id.to_string(),
            ];
            row.extend(a.theta.iter().map(f64::to_string));
            row.push(a.score.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_stats_json<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(out));
    w.write_record([
        "method",
        "truth_index",
        "parameter",
        "truth",
        "mean_of_means",
        "sd",
        "bias",
        "rmse",
        "replicates",
        "zero_fills",
    ])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            r.truth_index.to_string(),
            r.parameter.clone(),
            r.truth.to_string(),
            r.mean_of_means.to_string(),
            r.sd.to_string(),
            r.bias.to_string(),
            r.rmse.to_string(),
            r.replicates.to_string(),
            r.zero_fills.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
