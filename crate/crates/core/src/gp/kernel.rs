use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summaries::SummaryKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelFamily {
    LinearPlusRbf,
    LinearOnly,
    LinearTimesRbf,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] =
        [KernelFamily::LinearPlusRbf, KernelFamily::LinearOnly, KernelFamily::LinearTimesRbf];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::LinearPlusRbf => "linear_plus_rbf",
            KernelFamily::LinearOnly => "linear_only",
            KernelFamily::LinearTimesRbf => "linear_times_rbf",
        }
    }

    pub fn has_rbf(self) -> bool {
        self != KernelFamily::LinearOnly
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelFamily::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown kernel family {s:?}")))
    }
}

/// Input warping applied inside the dot-product term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Warp {
    Sqrt,
    Identity,
}

impl Warp {
    pub fn apply(self, n: f64) -> f64 {
        match self {
            Warp::Sqrt => n.sqrt(),
            Warp::Identity => n,
        }
    }

    /// Warp used for a summary: square root for quantities whose variance
    /// grows linearly in `n`, identity for triangle counts.
    pub fn for_summary(kind: SummaryKind) -> Warp {
        match kind {
            SummaryKind::AvgDegree | SummaryKind::InDegreeMean => Warp::Sqrt,
            SummaryKind::TriangleCount | SummaryKind::SampleTriangleCount | SummaryKind::InDegreeVariance => {
                Warp::Identity
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub warp: Warp,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, warp: Warp) -> Self {
        KernelSpec { family, warp }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpHyper {
    pub alpha: f64,
    pub gamma: f64,
    /// Ignored by `linear_only`.
    pub beta: f64,
    /// Ignored by `linear_only`.
    pub rho: f64,
    pub sigma2: f64,
}

pub const ALPHA_MIN: f64 = 0.05;

impl GpHyper {
    /// Checks the box constraints; `min_spacing` is the smallest gap between
    /// consecutive checkpoints.
    pub fn validate(&self, family: KernelFamily, min_spacing: f64) -> Result<()> {
        let vals = [self.alpha, self.gamma, self.beta, self.rho, self.sigma2];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if self.alpha < ALPHA_MIN || self.gamma < 0.0 || self.sigma2 < 0.0 {
            return Err(Error::InvalidInput(format!("hyperparameters out of range: {self:?}")));
        }
        if family.has_rbf() && (self.beta < 0.0 || self.rho < min_spacing || self.rho <= 0.0) {
            return Err(Error::InvalidInput(format!("hyperparameters out of range: {self:?}")));
        }
        Ok(())
    }
}

/// Noise-free part of the covariance.
pub fn signal_value(spec: KernelSpec, h: &GpHyper, n1: f64, n2: f64) -> f64 {
    let lin = h.alpha * spec.warp.apply(n1) * spec.warp.apply(n2) + h.gamma;
    match spec.family {
        KernelFamily::LinearOnly => lin,
        KernelFamily::LinearPlusRbf => lin + h.beta * rbf(n1, n2, h.rho),
        KernelFamily::LinearTimesRbf => lin * rbf(n1, n2, h.rho),
    }
}

pub fn kernel_value(spec: KernelSpec, h: &GpHyper, n1: f64, n2: f64) -> f64 {
    let noise = if n1 == n2 { h.sigma2 } else { 0.0 };
    signal_value(spec, h, n1, n2) + noise
}

fn rbf(n1: f64, n2: f64, rho: f64) -> f64 {
    (-(n1 - n2).powi(2) / (2.0 * rho * rho)).exp()
}
