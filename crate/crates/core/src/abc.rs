//! Rejection ABC on a reference table: prior draws, standardized distances,
//! reconstructed bivariate normal densities, top-k acceptance and posterior
//! summaries.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summaries::sample_variance;

/// Extrapolation and acceptance variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Exact summaries of networks grown to `n_o`, distance acceptance.
    S,
    /// Least-squares extrapolation, distance acceptance.
    LS,
    /// GP predictive density.
    GPa,
    /// GP predictive density with the covariance inflated by 100.
    GPb,
    /// GP predictive means, distance acceptance.
    GPc,
    /// Sampled triangle counts with least-squares extrapolation.
    RE,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::S, Method::LS, Method::GPa, Method::GPb, Method::GPc, Method::RE];

    pub fn name(self) -> &'static str {
        match self {
            Method::S => "S",
            Method::LS => "LS",
            Method::GPa => "GPa",
            Method::GPb => "GPb",
            Method::GPc => "GPc",
            Method::RE => "RE",
        }
    }

    pub fn uses_gp(self) -> bool {
        matches!(self, Method::GPa | Method::GPb | Method::GPc)
    }

    pub fn uses_density(self) -> bool {
        matches!(self, Method::GPa | Method::GPb)
    }

    /// Covariance inflation for density acceptance.
    pub fn inflate(self) -> f64 {
        if self == Method::GPb {
            100.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PriorBox {
    /// `lower == upper` is allowed and pins the coordinate.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::LengthMismatch(lower.len(), upper.len()));
        }
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::InvalidInput(format!("prior box lower {lower:?} exceeds upper {upper:?}")));
        }
        Ok(PriorBox { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim() && theta.iter().enumerate().all(|(i, &t)| self.lower[i] <= t && t <= self.upper[i])
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }
}

pub fn draw_prior<R: Rng + ?Sized>(prior: &PriorBox, rng: &mut R) -> Vec<f64> {
    prior
        .lower
        .iter()
        .zip(&prior.upper)
        .map(|(&l, &u)| {
            let u01: f64 = rng.random();
            (l + u01 * (u - l)).min(u)
        })
        .collect()
}

/// Source of the per-summary standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Standardization {
    /// Exact summaries of networks simulated fully to `n_o`.
    Auxiliary,
    /// The table's own extrapolated summaries.
    Extrapolated,
}

impl FromStr for Standardization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auxiliary" => Ok(Standardization::Auxiliary),
            "extrapolated" => Ok(Standardization::Extrapolated),
            _ => Err(Error::Config(format!("unknown standardization {s:?}"))),
        }
    }
}

impl fmt::Display for Standardization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Standardization::Auxiliary => "auxiliary",
            Standardization::Extrapolated => "extrapolated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sds {
    pub mode: Standardization,
    pub values: Vec<f64>,
    /// Set when some zero SD was replaced by 1.
    pub zero_replaced: bool,
}

/// Per-summary sample standard deviations (divisor `m − 1`) of `inputs`.
pub fn standardization_sds(mode: Standardization, inputs: &[Vec<f64>]) -> Result<Sds> {
    if inputs.len() < 2 {
        return Err(Error::TooFewInputs { needed: 2, got: inputs.len() });
    }
    let d = inputs[0].len();
    if let Some(bad) = inputs.iter().find(|v| v.len() != d) {
        return Err(Error::LengthMismatch(bad.len(), d));
    }
    if inputs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mut zero_replaced = false;
    let values = (0..d)
        .map(|j| {
            let col: Vec<f64> = inputs.iter().map(|v| v[j]).collect();
            let sd = sample_variance(&col).sqrt();
            if sd > 0.0 {
                sd
            } else {
                zero_replaced = true;
                1.0
            }
        })
        .collect();
    Ok(Sds { mode, values, zero_replaced })
}

pub fn std_euclidean(x: &[f64], y: &[f64], sds: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if sds.len() != x.len() {
        return Err(Error::LengthMismatch(sds.len(), x.len()));
    }
    Ok(x.iter().zip(y).zip(sds).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpFields {
    pub variances: Vec<f64>,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTableEntry {
    pub entry_id: u64,
    pub rng_seed: u64,
    pub theta: Vec<f64>,
    pub ext_summaries: Vec<f64>,
    pub gp: Option<GpFields>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub theta_names: Vec<String>,
    pub summary_names: Vec<String>,
    pub entries: Vec<ReferenceTableEntry>,
}

impl ReferenceTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn summaries(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.ext_summaries.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accepted {
    pub entry_id: u64,
    pub theta: Vec<f64>,
    /// Distance (ascending) or density (descending).
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcPosterior {
    pub method: Option<Method>,
    pub k: usize,
    pub accepted: Vec<Accepted>,
    /// Slots filled at random among zero-density entries.
    pub zero_fills: usize,
}

impl AbcPosterior {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = Some(method);
        self
    }

    pub fn write_csv<W: Write>(&self, theta_names: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["rank".to_string(), "entry_id".to_string()];
        header.extend(theta_names.iter().cloned());
        header.push("score".into());
        w.write_record(&header)?;
        for (rank, a) in self.accepted.iter().enumerate() {
            let mut row = vec![(rank + 1).to_string(), a.entry_id.to_string()];
            row.extend(a.theta.iter().map(|t| t.to_string()));
            row.push(a.score.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The `k` entries closest to `observed`; ties go to the smaller `entry_id`.
pub fn accept_top_k_distance(
    table: &ReferenceTable,
    observed: &[f64],
    sds: &[f64],
    k: usize,
) -> Result<AbcPosterior> {
    if k > table.len() {
        return Err(Error::KTooLarge { k, size: table.len() });
    }
    let mut scored = table
        .entries
        .iter()
        .map(|e| Ok((std_euclidean(&e.ext_summaries, observed, sds)?, e)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.entry_id.cmp(&b.1.entry_id)));
    let accepted = scored
        .into_iter()
        .take(k)
        .map(|(d, e)| Accepted { entry_id: e.entry_id, theta: e.theta.clone(), score: d })
        .collect();
    Ok(AbcPosterior { method: None, k, accepted, zero_fills: 0 })
}

/// Bivariate normal density at `observed` with covariance
/// `inflate · [[v₁, ρ√(v₁v₂)], [ρ√(v₁v₂), v₂]]`. Evaluated directly, so far
/// tails underflow to exactly 0.
pub fn bivariate_density(
    mean: [f64; 2],
    vars: [f64; 2],
    corr: f64,
    observed: [f64; 2],
    inflate: f64,
) -> Result<f64> {
    let ok = vars.iter().all(|v| *v > 0.0 && v.is_finite())
        && corr.is_finite()
        && corr.abs() < 1.0
        && inflate > 0.0
        && inflate.is_finite();
    if !ok {
        return Err(Error::DegenerateCovariance);
    }
    let s1 = (vars[0] * inflate).sqrt();
    let s2 = (vars[1] * inflate).sqrt();
    let z1 = (observed[0] - mean[0]) / s1;
    let z2 = (observed[1] - mean[1]) / s2;
    let one_minus = 1.0 - corr * corr;
    let q = (z1 * z1 - 2.0 * corr * z1 * z2 + z2 * z2) / one_minus;
    let norm = 2.0 * std::f64::consts::PI * s1 * s2 * one_minus.sqrt();
    let d = (-0.5 * q).exp() / norm;
    Ok(if d.is_nan() { 0.0 } else { d })
}

/// The `k` entries with the highest predictive density at `observed`. When
/// fewer than `k` densities are positive the remaining slots are drawn
/// uniformly from the zero-density entries.
pub fn accept_top_k_density<R: Rng + ?Sized>(
    table: &ReferenceTable,
    observed: &[f64],
    k: usize,
    inflate: f64,
    rng: &mut R,
) -> Result<AbcPosterior> {
    if k > table.len() {
        return Err(Error::KTooLarge { k, size: table.len() });
    }
    if observed.len() != 2 {
        return Err(Error::LengthMismatch(observed.len(), 2));
    }
    let mut positive = Vec::new();
    let mut zero = Vec::new();
    for e in &table.entries {
        let gp = e.gp.as_ref().ok_or(Error::MissingGpFields(e.entry_id))?;
        if gp.variances.len() != 2 || e.ext_summaries.len() != 2 {
            return Err(Error::LengthMismatch(gp.variances.len(), 2));
        }
        let d = bivariate_density(
            [e.ext_summaries[0], e.ext_summaries[1]],
            [gp.variances[0], gp.variances[1]],
            gp.correlation,
            [observed[0], observed[1]],
            inflate,
        )?;
        if d > 0.0 {
            positive.push((d, e));
        } else {
            zero.push(e);
        }
    }
    positive.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.entry_id.cmp(&b.1.entry_id)));
    let mut accepted: Vec<Accepted> = positive
        .iter()
        .take(k)
        .map(|(d, e)| Accepted { entry_id: e.entry_id, theta: e.theta.clone(), score: *d })
        .collect();
    let missing = k - accepted.len();
    let mut fills: Vec<&ReferenceTableEntry> =
        rand::seq::index::sample(rng, zero.len(), missing).into_iter().map(|i| zero[i]).collect();
    fills.sort_by_key(|e| e.entry_id);
    accepted.extend(fills.into_iter().map(|e| Accepted { entry_id: e.entry_id, theta: e.theta.clone(), score: 0.0 }));
    Ok(AbcPosterior { method: None, k, accepted, zero_fills: missing })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorStats {
    pub k: usize,
    pub mean: Vec<f64>,
    /// Divisor `k − 1`; 0 for a single accepted point.
    pub variance: Vec<f64>,
    pub q025: Vec<f64>,
    pub q975: Vec<f64>,
    /// `(mean − truth)²` when a truth is supplied.
    pub squared_error: Option<Vec<f64>>,
    pub zero_fills: usize,
}

/// Linear-interpolation quantile of sorted data (position `(m − 1)·p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean computed as an offset from the first value, so that `k` copies of
/// one number average to that number exactly.
pub(crate) fn stable_mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

pub fn posterior_stats(posterior: &AbcPosterior, truth: Option<&[f64]>) -> Result<PosteriorStats> {
    if posterior.accepted.is_empty() {
        return Err(Error::EmptyPosterior);
    }
    let dim = posterior.accepted[0].theta.len();
    if let Some(t) = truth {
        if t.len() != dim {
            return Err(Error::LengthMismatch(t.len(), dim));
        }
    }
    let mut stats = PosteriorStats {
        k: posterior.accepted.len(),
        mean: Vec::with_capacity(dim),
        variance: Vec::with_capacity(dim),
        q025: Vec::with_capacity(dim),
        q975: Vec::with_capacity(dim),
        squared_error: truth.map(|_| Vec::with_capacity(dim)),
        zero_fills: posterior.zero_fills,
    };
    for j in 0..dim {
        let mut col: Vec<f64> = posterior.accepted.iter().map(|a| a.theta[j]).collect();
        let mean = stable_mean(&col);
        stats.mean.push(mean);
        stats.variance.push(sample_variance(&col));
        col.sort_by(f64::total_cmp);
        stats.q025.push(quantile_sorted(&col, 0.025));
        stats.q975.push(quantile_sorted(&col, 0.975));
        if let (Some(se), Some(t)) = (stats.squared_error.as_mut(), truth) {
            se.push((mean - t[j]).powi(2));
        }
    }
    Ok(stats)
}
