//! Reference-table construction and its CSV form.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rustc_hash::FxHashSet;

use super::config::{ModelKind, RunConfig};
use crate::abc::{draw_prior, GpFields, Method, ReferenceTable, ReferenceTableEntry};
use crate::error::{Error, Result};
use crate::gp::{self, KernelSpec, Warp};
use crate::graph::Graph;
use crate::lsfit::{self, Family};
use crate::models::{grow_dmc, grow_price, DmcParams, Growth, GrowthPlan, PriceParams};
use crate::rng::{entry_rng, mix};
use crate::summaries::SummarySpec;

/// Entries built per parallel batch before rows are flushed to disk.
const CHUNK: usize = 32;

/// Grows `seed` under `theta` to `n_target`, recording `specs` at `checkpoints`.
pub fn grow_model<R: rand::Rng + ?Sized>(
    cfg: &RunConfig,
    seed: &Graph,
    theta: &[f64],
    n_target: usize,
    checkpoints: Vec<usize>,
    specs: Vec<SummarySpec>,
    rng: &mut R,
) -> Result<Growth> {
    let plan = GrowthPlan::new(n_target, checkpoints, specs);
    match cfg.model {
        ModelKind::Dmc => grow_dmc(seed.clone(), &DmcParams::new(theta[0], theta[1])?, &plan, rng),
        ModelKind::Price => {
            grow_price(seed.clone(), &PriceParams::new(theta[0], theta[1], cfg.price_out_cap)?, &plan, rng)
        }
    }
}

/// Fitted GP parameters of one summary: `a, c, alpha, gamma, beta, rho, sigma2`.
pub type GpParams = [f64; 7];

pub const GP_PARAM_NAMES: [&str; 7] = ["a", "c", "alpha", "gamma", "beta", "rho", "sigma2"];

/// One successfully built table row.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryRow {
    pub entry: ReferenceTableEntry,
    /// Per summary, for GP methods only.
    pub gp_params: Vec<GpParams>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailedEntry {
    pub entry_id: u64,
    pub rng_seed: u64,
    pub kind: String,
    pub message: String,
}

/// Builds the entry with 1-based index `entry_id`.
pub fn build_entry(cfg: &RunConfig, method: Method, seed: &Graph, entry_id: u64) -> Result<EntryRow> {
    let rng_seed = mix(cfg.master_seed, entry_id);
    let mut rng = entry_rng(rng_seed);
    let theta = draw_prior(&cfg.prior, &mut rng);
    let specs = cfg.summary_specs(method)?;
    let mut row = EntryRow {
        entry: ReferenceTableEntry { entry_id, rng_seed, theta, ext_summaries: Vec::new(), gp: None },
        gp_params: Vec::new(),
    };

    if method == Method::S {
        let growth = grow_model(cfg, seed, &row.entry.theta, cfg.n_o, vec![cfg.n_o], specs, &mut rng)?;
        row.entry.ext_summaries = growth.series.values[0].clone();
        return Ok(row);
    }

    let growth = grow_model(cfg, seed, &row.entry.theta, cfg.n_s, cfg.grid_for(method), specs.clone(), &mut rng)?;
    let ns = growth.series.grid();
    let n_o = cfg.n_o as f64;
    let forms = cfg.forms_for(method);

    if !method.uses_gp() {
        for (j, family) in forms.iter().enumerate() {
            let fit = lsfit::fit(&ns, &growth.series.column(j), *family)?;
            row.entry.ext_summaries.push(lsfit::extrapolate(&fit, n_o)?);
        }
        return Ok(row);
    }

    let mut fits = Vec::with_capacity(specs.len());
    let mut variances = Vec::with_capacity(specs.len());
    for (j, spec) in specs.iter().enumerate() {
        let values = growth.series.column(j);
        // The GP mean is a power law, so the LS start must be one too.
        let family = if matches!(forms[j], Family::Power | Family::PowerOffset) { forms[j] } else { Family::Power };
        let ls = lsfit::fit(&ns, &values, family)?;
        let fit = gp::fit_map(&ns, &values, KernelSpec::new(cfg.kernel, Warp::for_summary(spec.kind)), &ls)?;
        let pred = gp::predict(&fit, n_o)?;
        row.entry.ext_summaries.push(pred.mean);
        variances.push(pred.variance);
        let h = fit.hyper;
        row.gp_params.push([fit.mean_params[0], fit.mean_params[1], h.alpha, h.gamma, h.beta, h.rho, h.sigma2]);
        fits.push(fit);
    }
    // Correlation between the first two summaries' residuals.
    let correlation = if fits.len() >= 2 { gp::summary_correlation(&fits[0], &fits[1])?.value } else { 0.0 };
    row.entry.gp = Some(GpFields { variances, correlation });
    Ok(row)
}

/// A built table plus the entries that failed.
#[derive(Debug, Clone)]
pub struct TableBuild {
    pub table: ReferenceTable,
    pub rows: Vec<EntryRow>,
    pub failures: Vec<FailedEntry>,
}

impl TableBuild {
    pub fn len(&self) -> usize {
        self.table.len() + self.failures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Path of the failure log that sits next to `table`.
pub fn failed_path(table: &Path) -> PathBuf {
    let stem = table.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
    table.with_file_name(format!("{stem}.failed.csv"))
}

fn column_names(cfg: &RunConfig, method: Method) -> Result<(Vec<String>, Vec<String>)> {
    let summaries: Vec<String> = cfg.summary_specs(method)?.iter().map(|s| s.name().to_string()).collect();
    let mut header = vec!["entry_id".to_string(), "rng_seed".to_string()];
    header.extend(cfg.theta_names());
    header.extend(summaries.iter().map(|s| format!("ext_{s}")));
    if method.uses_gp() {
        header.extend(summaries.iter().map(|s| format!("var_{s}")));
        header.push("gp_corr".into());
        for s in &summaries {
            header.extend(GP_PARAM_NAMES.iter().map(|p| format!("gp_{s}_{p}")));
        }
    }
    Ok((header, summaries))
}

fn row_record(row: &EntryRow) -> Vec<String> {
    let e = &row.entry;
    let mut rec = vec![e.entry_id.to_string(), e.rng_seed.to_string()];
    rec.extend(e.theta.iter().map(f64::to_string));
    rec.extend(e.ext_summaries.iter().map(f64::to_string));
    if let Some(gp) = &e.gp {
        rec.extend(gp.variances.iter().map(f64::to_string));
        rec.push(gp.correlation.to_string());
        for p in &row.gp_params {
            rec.extend(p.iter().map(f64::to_string));
        }
    }
    rec
}

fn hash_line(cfg: &RunConfig, method: Method) -> String {
    format!("# config_hash={} method={method}", cfg.table_hash(method))
}

/// Reads the `# config_hash=...` line of an existing file.
fn read_hash_line(path: &Path) -> Result<Option<String>> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    let first = first.trim_end();
    Ok(first.starts_with("# config_hash=").then(|| first.to_string()))
}

fn check_hash(path: &Path, expected: &str) -> Result<()> {
    match read_hash_line(path)? {
        Some(h) if h == expected => Ok(()),
        Some(h) => Err(Error::Config(format!(
            "{} was built with a different configuration ({h:?}, expected {expected:?})",
            path.display()
        ))),
        None => Err(Error::Config(format!("{} has no config hash line", path.display()))),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("bad number {s:?}") })
}

fn parse_u64(s: &str, line: usize) -> Result<u64> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("bad integer {s:?}") })
}

/// Reads a reference table CSV. GP columns are picked up when present.
pub fn read_table_csv(path: &Path) -> Result<(ReferenceTable, Vec<EntryRow>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let first_ext = header
        .iter()
        .position(|h| h.starts_with("ext_"))
        .ok_or_else(|| Error::Parse { line: 2, msg: "no ext_ columns".into() })?;
    let theta_names = header[2..first_ext].to_vec();
    let summary_names: Vec<String> =
        header.iter().filter_map(|h| h.strip_prefix("ext_")).map(str::to_string).collect();
    let s = summary_names.len();
    let has_gp = header.iter().any(|h| h == "gp_corr");
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 3;
        let num = |j: usize| parse_f64(&rec[j], line);
        let theta = (2..first_ext).map(num).collect::<Result<Vec<_>>>()?;
        let ext = (first_ext..first_ext + s).map(num).collect::<Result<Vec<_>>>()?;
        let (gp, gp_params) = if has_gp {
            let v0 = first_ext + s;
            let variances = (v0..v0 + s).map(num).collect::<Result<Vec<_>>>()?;
            let correlation = num(v0 + s)?;
            let p0 = v0 + s + 1;
            let mut params = Vec::with_capacity(s);
            for j in 0..s {
                let mut p = [0.0; 7];
                for (k, slot) in p.iter_mut().enumerate() {
                    *slot = num(p0 + 7 * j + k)?;
                }
                params.push(p);
            }
            (Some(GpFields { variances, correlation }), params)
        } else {
            (None, Vec::new())
        };
        rows.push(EntryRow {
            entry: ReferenceTableEntry {
                entry_id: parse_u64(&rec[0], line)?,
                rng_seed: parse_u64(&rec[1], line)?,
                theta,
                ext_summaries: ext,
                gp,
            },
            gp_params,
        });
    }
    rows.sort_by_key(|r| r.entry.entry_id);
    let table = ReferenceTable {
        theta_names,
        summary_names,
        entries: rows.iter().map(|r| r.entry.clone()).collect(),
    };
    Ok((table, rows))
}

fn read_failed_csv(path: &Path) -> Result<Vec<FailedEntry>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        out.push(FailedEntry {
            entry_id: parse_u64(&rec[0], i + 3)?,
            rng_seed: parse_u64(&rec[1], i + 3)?,
            kind: rec[2].to_string(),
            message: rec[3].to_string(),
        });
    }
    Ok(out)
}

/// Opens `path` for appending, writing the hash and header lines when new.
fn open_append(path: &Path, hash: &str, header: &[String]) -> Result<csv::Writer<File>> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w_builder = csv::WriterBuilder::new();
    w_builder.has_headers(false);
    if fresh {
        writeln!(f, "{hash}")?;
        let mut w = w_builder.from_writer(f);
        w.write_record(header)?;
        return Ok(w);
    }
    Ok(w_builder.from_writer(f))
}

/// Builds `cfg.b` entries for `method`. With `path`, rows are appended to that
/// CSV as they complete and an interrupted build resumes where it stopped;
/// failures go to the sibling `.failed.csv`.
pub fn build_reference_table(cfg: &RunConfig, method: Method, seed: &Graph, path: Option<&Path>) -> Result<TableBuild> {
    let (header, summary_names) = column_names(cfg, method)?;
    if method != Method::S {
        GrowthPlan::new(cfg.n_s, cfg.grid_for(method), cfg.summary_specs(method)?).validate(seed.node_count())?;
    } else if seed.node_count() >= cfg.n_o {
        return Err(Error::PlanInvalid(format!("seed of {} nodes is not smaller than n_o", seed.node_count())));
    }
    let hash = hash_line(cfg, method);

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut writers = None;
    if let Some(path) = path {
        let fpath = failed_path(path);
        if path.exists() {
            check_hash(path, &hash)?;
            rows = read_table_csv(path)?.1;
        }
        if fpath.exists() {
            check_hash(&fpath, &hash)?;
            failures = read_failed_csv(&fpath)?;
        }
        let failed_header: Vec<String> =
            ["entry_id", "rng_seed", "error_kind", "message"].iter().map(|s| s.to_string()).collect();
        writers = Some((open_append(path, &hash, &header)?, open_append(&fpath, &hash, &failed_header)?));
    }

    let done: FxHashSet<u64> =
        rows.iter().map(|r: &EntryRow| r.entry.entry_id).chain(failures.iter().map(|f| f.entry_id)).collect();
    let todo: Vec<u64> = (1..=cfg.b as u64).filter(|id| !done.contains(id)).collect();

    for chunk in todo.chunks(CHUNK) {
        let built: Vec<(u64, Result<EntryRow>)> =
            chunk.par_iter().map(|&id| (id, build_entry(cfg, method, seed, id))).collect();
        for (id, res) in built {
            match res {
                Ok(row) => {
                    if let Some((w, _)) = writers.as_mut() {
                        w.write_record(row_record(&row))?;
                    }
                    rows.push(row);
                }
                Err(e) => {
                    let f = FailedEntry {
                        entry_id: id,
                        rng_seed: mix(cfg.master_seed, id),
                        kind: e.kind().to_string(),
                        message: e.to_string(),
                    };
                    if let Some((_, w)) = writers.as_mut() {
                        w.write_record([f.entry_id.to_string(), f.rng_seed.to_string(), f.kind.clone(), f.message.clone()])?;
                    }
                    failures.push(f);
                }
            }
        }
        if let Some((w, fw)) = writers.as_mut() {
            w.flush()?;
            fw.flush()?;
        }
    }

    let limit = cfg.b as u64;
    rows.retain(|r| r.entry.entry_id <= limit);
    failures.retain(|f| f.entry_id <= limit);
    rows.sort_by_key(|r| r.entry.entry_id);
    failures.sort_by_key(|f| f.entry_id);
    let table = ReferenceTable {
        theta_names: cfg.theta_names(),
        summary_names,
        entries: rows.iter().map(|r| r.entry.clone()).collect(),
    };
    Ok(TableBuild { table, rows, failures })
}
