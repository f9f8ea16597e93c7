//! Wall-clock cost of building entries and computing observed summaries.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use super::config::RunConfig;
use super::experiment::observed_seed;
use super::observed::{seed_graph, simulate_observed};
use super::table::build_entry;
use crate::abc::Method;
use crate::error::Result;
use crate::graph::Graph;
use crate::rng::entry_rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub method: Method,
    pub n_o: usize,
    pub table_size: usize,
    /// Mean seconds to build one entry.
    pub entry_seconds: f64,
    /// Mean seconds to compute the observed summary the method compares
    /// against (subsampled for RE, full census otherwise).
    pub observed_seconds: f64,
    /// `table_size · entry_seconds + observed_seconds`.
    pub total_seconds: f64,
    pub reps: usize,
}

/// Mean seconds per entry over entries `1..=reps`.
pub fn entry_seconds(cfg: &RunConfig, method: Method, seed: &Graph, reps: usize) -> Result<f64> {
    let mut total = 0.0;
    for id in 1..=reps as u64 {
        let start = Instant::now();
        // Failed entries cost time too; only the clock matters here.
        let _ = build_entry(cfg, method, seed, id);
        total += start.elapsed().as_secs_f64();
    }
    Ok(total / reps.max(1) as f64)
}

/// Mean seconds for the full triangle census and for `replicates` induced
/// triangle counts on `n_star` sampled nodes of `g`.
pub fn observed_summary_seconds(g: &Graph, n_star: usize, replicates: usize, reps: usize) -> Result<(f64, f64)> {
    let mut rng = entry_rng(0);
    let (mut full, mut sub) = (0.0, 0.0);
    for _ in 0..reps {
        let start = Instant::now();
        std::hint::black_box(g.count_triangles());
        full += start.elapsed().as_secs_f64();

        let start = Instant::now();
        for _ in 0..replicates {
            let s = g.sample_nodes(n_star, &mut rng)?;
            std::hint::black_box(g.induced_triangles(&s));
        }
        sub += start.elapsed().as_secs_f64();
    }
    let r = reps.max(1) as f64;
    Ok((full / r, sub / r))
}

/// One row per (method, n_o, table size) requested in `cfg`.
pub fn timing_report(cfg: &RunConfig) -> Result<Vec<TimingRow>> {
    let seed = seed_graph(cfg)?;
    let reps = cfg.timing_reps.max(1);
    let mut rows = Vec::new();
    for &n_o in &cfg.timing_n_o {
        let c = cfg.with("n_o", &n_o.to_string())?;
        let observed = simulate_observed(&c, &seed, &c.prior.midpoint(), observed_seed(&c, 0))?;
        let (full, sub) = observed_summary_seconds(&observed, c.n_star.min(n_o), c.replicates, reps)?;
        for &method in &cfg.methods {
            let entry = entry_seconds(&c, method, &seed, reps)?;
            let obs = if method == Method::RE { sub } else { full };
            for &size in &cfg.timing_table_sizes {
                rows.push(TimingRow {
                    method,
                    n_o,
                    table_size: size,
                    entry_seconds: entry,
                    observed_seconds: obs,
                    total_seconds: size as f64 * entry + obs,
                    reps,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "n_o", "table_size", "entry_seconds", "observed_seconds", "total_seconds", "reps"])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            r.n_o.to_string(),
            r.table_size.to_string(),
            r.entry_seconds.to_string(),
            r.observed_seconds.to_string(),
            r.total_seconds.to_string(),
            r.reps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
