//! Summary statistics evaluated on a graph snapshot, and the per-realization
//! series recorded at growth checkpoints.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SummaryKind {
    AvgDegree,
    TriangleCount,
    SampleTriangleCount,
    InDegreeMean,
    InDegreeVariance,
}

impl SummaryKind {
    pub const ALL: [SummaryKind; 5] = [
        SummaryKind::AvgDegree,
        SummaryKind::TriangleCount,
        SummaryKind::SampleTriangleCount,
        SummaryKind::InDegreeMean,
        SummaryKind::InDegreeVariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SummaryKind::AvgDegree => "avg_degree",
            SummaryKind::TriangleCount => "triangles",
            SummaryKind::SampleTriangleCount => "sample_triangles",
            SummaryKind::InDegreeMean => "in_degree_mean",
            SummaryKind::InDegreeVariance => "in_degree_var",
        }
    }

    pub fn is_sampled(self) -> bool {
        self == SummaryKind::SampleTriangleCount
    }
}

impl fmt::Display for SummaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SummaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SummaryKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown summary {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummarySpec {
    pub kind: SummaryKind,
    /// Sample size for sampled kinds.
    pub n_star: usize,
    /// Number of independent samples averaged per evaluation.
    pub replicates: usize,
}

impl SummarySpec {
    pub fn new(kind: SummaryKind) -> Self {
        SummarySpec { kind, n_star: 0, replicates: 1 }
    }

    pub fn sampled(n_star: usize, replicates: usize) -> Result<Self> {
        let spec = SummarySpec { kind: SummaryKind::SampleTriangleCount, n_star, replicates };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidInput("replicates must be at least 1".into()));
        }
        if self.kind.is_sampled() && self.n_star < 3 {
            return Err(Error::InvalidInput(format!(
                "sampled triangle count needs n_star >= 3, got {}",
                self.n_star
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }
}

/// Evaluates one summary on `g`. Deterministic kinds ignore `rng`.
pub fn evaluate<R: Rng + ?Sized>(spec: &SummarySpec, g: &Graph, rng: &mut R) -> Result<f64> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    match spec.kind {
        SummaryKind::AvgDegree => g.average_degree(),
        SummaryKind::TriangleCount => Ok(g.triangle_count() as f64),
        SummaryKind::SampleTriangleCount => {
            let mut total = 0.0;
            for _ in 0..spec.replicates {
                let sample = g.sample_nodes(spec.n_star, rng)?;
                total += g.induced_triangles(&sample) as f64;
            }
            Ok(total / spec.replicates as f64)
        }
        SummaryKind::InDegreeMean => {
            require_directed(g, spec.kind)?;
            Ok(g.edge_count() as f64 / g.node_count() as f64)
        }
        SummaryKind::InDegreeVariance => {
            require_directed(g, spec.kind)?;
            let n = g.node_count() as f64;
            let mean = g.edge_count() as f64 / n;
            let ss: f64 = (0..g.node_count()).map(|v| (g.in_degree(v) as f64 - mean).powi(2)).sum();
            Ok(ss / n)
        }
    }
}

fn require_directed(g: &Graph, kind: SummaryKind) -> Result<()> {
    if g.is_directed() {
        Ok(())
    } else {
        Err(Error::WrongDirectedness(kind.name()))
    }
}

pub fn evaluate_all<R: Rng + ?Sized>(specs: &[SummarySpec], g: &Graph, rng: &mut R) -> Result<Vec<f64>> {
    specs.iter().map(|s| evaluate(s, g, rng)).collect()
}

/// Monte Carlo variance of a single sample triangle count and of the mean of
/// `k` independent sample counts, each over `trials` evaluations.
pub fn replicate_variance_reduction<R: Rng + ?Sized>(
    g: &Graph,
    n_star: usize,
    k: usize,
    rng: &mut R,
    trials: usize,
) -> Result<(f64, f64)> {
    if trials < 2 {
        return Err(Error::TooFewInputs { needed: 2, got: trials });
    }
    let single = SummarySpec::sampled(n_star, 1)?;
    let averaged = SummarySpec::sampled(n_star, k)?;
    let a: Vec<f64> = (0..trials).map(|_| evaluate(&single, g, rng)).collect::<Result<_>>()?;
    let b: Vec<f64> = (0..trials).map(|_| evaluate(&averaged, g, rng)).collect::<Result<_>>()?;
    Ok((sample_variance(&a), sample_variance(&b)))
}

/// Variance with divisor `n − 1`; 0 for fewer than two values.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Summary values of one realization at its checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedSeries {
    pub entry_id: u64,
    pub rng_seed: u64,
    pub theta: Vec<f64>,
    pub checkpoints: Vec<usize>,
    pub summary_names: Vec<String>,
    /// `values[t][j]`: summary `j` at `checkpoints[t]`.
    pub values: Vec<Vec<f64>>,
}

impl TrackedSeries {
    pub fn new(summary_names: Vec<String>) -> Self {
        TrackedSeries {
            entry_id: 0,
            rng_seed: 0,
            theta: Vec::new(),
            checkpoints: Vec::new(),
            summary_names,
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, n: usize, row: Vec<f64>) -> Result<()> {
        if row.len() != self.summary_names.len() {
            return Err(Error::LengthMismatch(row.len(), self.summary_names.len()));
        }
        if self.checkpoints.last().is_some_and(|&last| n <= last) {
            return Err(Error::PlanInvalid(format!("checkpoint {n} is not increasing")));
        }
        self.checkpoints.push(n);
        self.values.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    /// Values of summary `j` across checkpoints.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.summary_names.iter().position(|s| s == name).map(|j| self.column(j))
    }

    /// Checkpoints as reals, for fitting.
    pub fn grid(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|&n| n as f64).collect()
    }
}

/// Writes series as CSV: `entry_id,rng_seed,<theta...>,n,<summaries...>`,
/// one row per (entry, checkpoint).
pub fn write_series_csv<W: Write>(theta_names: &[String], series: &[TrackedSeries], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some(first) = series.first() else {
        w.flush()?;
        return Ok(());
    };
    let mut header = vec!["entry_id".to_string(), "rng_seed".to_string()];
    header.extend(theta_names.iter().cloned());
    header.push("n".into());
    header.extend(first.summary_names.iter().cloned());
    w.write_record(&header)?;
    for s in series {
        for (n, row) in s.checkpoints.iter().zip(&s.values) {
            let mut rec = vec![s.entry_id.to_string(), s.rng_seed.to_string()];
            rec.extend(s.theta.iter().map(|x| x.to_string()));
            rec.push(n.to_string());
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads series written by [`write_series_csv`]; `theta_len` tells where the
/// theta columns end.
pub fn read_series_csv<R: Read>(theta_len: usize, input: R) -> Result<Vec<TrackedSeries>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let summary_start = 2 + theta_len + 1;
    if header.len() < summary_start {
        return Err(Error::Parse { line: 1, msg: "series header too short".into() });
    }
    let names = header[summary_start..].to_vec();
    let mut out: Vec<TrackedSeries> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |j: usize| -> Result<f64> {
            rec.get(j)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse { line, msg: format!("bad value in column {}", j + 1) })
        };
        let int = |j: usize| -> Result<u64> {
            rec.get(j)
                .and_then(|s| s.parse::<u64>().ok())
                .ok_or_else(|| Error::Parse { line, msg: format!("bad integer in column {}", j + 1) })
        };
        let entry_id = int(0)?;
        if out.last().is_none_or(|s| s.entry_id != entry_id) {
            let mut s = TrackedSeries::new(names.clone());
            s.entry_id = entry_id;
            s.rng_seed = int(1)?;
            s.theta = (0..theta_len).map(|j| num(2 + j)).collect::<Result<_>>()?;
            out.push(s);
        }
        let n = int(2 + theta_len)? as usize;
        let row = (summary_start..header.len()).map(num).collect::<Result<Vec<_>>>()?;
        out.last_mut().expect("pushed above").push(n, row)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::entry_rng;

    #[test]
    fn deterministic_kinds() {
        let g = Graph::complete(4);
        let mut rng = entry_rng(0);
        assert_eq!(evaluate(&SummarySpec::new(SummaryKind::TriangleCount), &g, &mut rng).unwrap(), 4.0);
        assert_eq!(evaluate(&SummarySpec::new(SummaryKind::AvgDegree), &g, &mut rng).unwrap(), 3.0);
        assert!(matches!(
            evaluate(&SummarySpec::new(SummaryKind::InDegreeMean), &g, &mut rng),
            Err(Error::WrongDirectedness(_))
        ));
    }

    #[test]
    fn in_degree_moments() {
        let mut g = Graph::new_directed(2);
        g.add_edge(0, 1).unwrap();
        let mut rng = entry_rng(0);
        let mean = evaluate(&SummarySpec::new(SummaryKind::InDegreeMean), &g, &mut rng).unwrap();
        let var = evaluate(&SummarySpec::new(SummaryKind::InDegreeVariance), &g, &mut rng).unwrap();
        assert_eq!(mean, 0.5);
        assert_eq!(var, 0.25);
        assert_eq!(mean * g.node_count() as f64, g.edge_count() as f64);
    }

    #[test]
    fn full_sample_equals_population_count() {
        let g = Graph::complete(6);
        let mut rng = entry_rng(2);
        for reps in [1, 3, 7] {
            let spec = SummarySpec::sampled(6, reps).unwrap();
            assert_eq!(evaluate(&spec, &g, &mut rng).unwrap(), 20.0);
        }
        assert!(SummarySpec::sampled(2, 1).is_err());
        assert!(SummarySpec::sampled(5, 0).is_err());
        let too_big = SummarySpec::sampled(7, 1).unwrap();
        assert!(matches!(evaluate(&too_big, &g, &mut rng), Err(Error::SampleTooLarge { .. })));
    }

    #[test]
    fn single_replicate_variances_agree() {
        let g = crate::graph::er_seed(60, 0.3, 4).unwrap();
        let mut rng = entry_rng(8);
        let (single, avg) = replicate_variance_reduction(&g, 20, 1, &mut rng, 4000).unwrap();
        assert!((avg / single - 1.0).abs() < 0.15, "{single} vs {avg}");
    }

    #[test]
    fn series_csv_round_trip() {
        let mut s = TrackedSeries::new(vec!["avg_degree".into(), "triangles".into()]);
        s.entry_id = 3;
        s.rng_seed = 99;
        s.theta = vec![0.25, 0.5];
        s.push(35, vec![1.5, 2.0]).unwrap();
        s.push(40, vec![1.75, 3.0]).unwrap();
        assert!(s.push(40, vec![0.0, 0.0]).is_err());
        let mut buf = Vec::new();
        write_series_csv(&["q_m".into(), "q_c".into()], &[s.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("entry_id,rng_seed,q_m,q_c,n,avg_degree,triangles\n"));
        let back = read_series_csv(2, buf.as_slice()).unwrap();
        assert_eq!(back, vec![s]);
    }
}
