//! Per-realization least-squares fits of growth curves and their
//! extrapolation to the observed network size.
//!
//! The objective is the plain sum of squared residuals on the original scale,
//! so the large-`n` end of the curve, which matters most for extrapolation,
//! is not down-weighted as it would be by a log-log regression.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::special::{digamma, trigamma, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `a·nᶜ`
    Power,
    /// `a·nᶜ + d`
    PowerOffset,
    /// `a/n + c`
    Inverse,
    /// `(γ + ψ₀(a·n + 1))ᶜ + d`
    Digamma,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Power, Family::PowerOffset, Family::Inverse, Family::Digamma];

    pub fn name(self) -> &'static str {
        match self {
            Family::Power => "power",
            Family::PowerOffset => "power_offset",
            Family::Inverse => "inverse",
            Family::Digamma => "digamma",
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            Family::Power | Family::Inverse => 2,
            Family::PowerOffset | Family::Digamma => 3,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown functional form {s:?}")))
    }
}

/// A family together with its parameters `(a, c[, d])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalForm {
    pub family: Family,
    pub params: Vec<f64>,
}

impl FunctionalForm {
    pub fn new(family: Family, params: Vec<f64>) -> Result<Self> {
        if params.len() != family.param_count() {
            return Err(Error::LengthMismatch(params.len(), family.param_count()));
        }
        Ok(FunctionalForm { family, params })
    }

    pub fn eval(&self, n: f64) -> f64 {
        eval(self.family, &self.params, n)
    }
}

fn eval(family: Family, p: &[f64], n: f64) -> f64 {
    match family {
        Family::Power => p[0] * n.powf(p[1]),
        Family::PowerOffset => p[0] * n.powf(p[1]) + p[2],
        Family::Inverse => p[0] / n + p[1],
        Family::Digamma => harmonic(p[0], n).powf(p[1]) + p[2],
    }
}

/// γ + ψ₀(a·n + 1), the harmonic number H_{a·n}.
fn harmonic(a: f64, n: f64) -> f64 {
    EULER_GAMMA + digamma(a * n + 1.0)
}

/// Partial derivatives of the model at `n` with respect to each parameter.
fn gradient(family: Family, p: &[f64], n: f64, out: &mut [f64]) {
    match family {
        Family::Power | Family::PowerOffset => {
            let nc = n.powf(p[1]);
            out[0] = nc;
            out[1] = p[0] * nc * n.ln();
            if family == Family::PowerOffset {
                out[2] = 1.0;
            }
        }
        Family::Inverse => {
            out[0] = 1.0 / n;
            out[1] = 1.0;
        }
        Family::Digamma => {
            let h = harmonic(p[0], n);
            let hc = h.powf(p[1]);
            out[0] = p[1] * h.powf(p[1] - 1.0) * trigamma(p[0] * n + 1.0) * n;
            out[1] = if h > 0.0 { hc * h.ln() } else { 0.0 };
            out[2] = 1.0;
        }
    }
}

fn admissible(family: Family, p: &[f64]) -> bool {
    p.iter().all(|v| v.is_finite()) && (family != Family::Digamma || p[0] > 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsFit {
    pub form: FunctionalForm,
    pub residual_sse: f64,
    pub converged: bool,
}

/// Multi-start grid for `(a, c)`: `a` log-spaced on [1e-3, 1e3], `c` evenly
/// spaced on [0.1, 3].
pub const START_A: [f64; 5] = [1e-3, 0.031_622_776_601_683_79, 1.0, 31.622_776_601_683_79, 1e3];
pub const START_C: [f64; 5] = [0.1, 0.825, 1.55, 2.275, 3.0];

const MAX_ITER: usize = 300;
const GTOL: f64 = 1e-10;
const XTOL: f64 = 1e-15;
const FTOL: f64 = 1e-15;
/// A residual norm this small relative to the data norm is an exact fit;
/// the gradient direction is then rounding noise.
const EXACT_RTOL: f64 = 1e-12;

/// Fits `family` to `(ns, values)` by damped Gauss–Newton from a fixed set of
/// starting points and keeps the lowest residual.
pub fn fit(ns: &[f64], values: &[f64], family: Family) -> Result<LsFit> {
    if ns.len() != values.len() {
        return Err(Error::LengthMismatch(ns.len(), values.len()));
    }
    if ns.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if ns.iter().any(|&n| n <= 0.0) {
        return Err(Error::InvalidInput("node counts must be positive".into()));
    }
    let mut distinct = ns.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < family.param_count() {
        return Err(Error::TooFewPoints { points: distinct.len(), params: family.param_count() });
    }

    if values.iter().all(|&v| v == 0.0) {
        let params = match family {
            Family::Power => vec![0.0, 1.0],
            Family::PowerOffset | Family::Digamma => vec![0.0, 1.0, 0.0],
            Family::Inverse => vec![0.0, 0.0],
        };
        return Ok(LsFit { form: FunctionalForm { family, params }, residual_sse: 0.0, converged: true });
    }

    let mut best: Option<LsFit> = None;
    for start in starts(ns, values, family) {
        let Some(candidate) = levenberg_marquardt(ns, values, family, start) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some(b) => candidate.residual_sse < b.residual_sse,
        };
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or(Error::NotConverged)
}

fn starts(ns: &[f64], values: &[f64], family: Family) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if matches!(family, Family::Power | Family::PowerOffset) {
        if let Some((a, c)) = loglog_init(ns, values) {
            out.push(with_offset(ns, values, family, a, c));
        }
    }
    for &a in &START_A {
        for &c in &START_C {
            out.push(with_offset(ns, values, family, a, c));
        }
    }
    out
}

/// Offset `d` that best matches the data for fixed `(a, c)`.
fn with_offset(ns: &[f64], values: &[f64], family: Family, a: f64, c: f64) -> Vec<f64> {
    match family {
        Family::Power | Family::Inverse => vec![a, c],
        Family::PowerOffset | Family::Digamma => {
            let mut p = vec![a, c, 0.0];
            let d = ns.iter().zip(values).map(|(&n, &y)| y - eval(family, &p, n)).sum::<f64>()
                / ns.len() as f64;
            p[2] = if d.is_finite() { d } else { 0.0 };
            p
        }
    }
}

/// Ordinary regression of `ln s` on `ln n` over the positive values.
fn loglog_init(ns: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        ns.iter().zip(values).filter(|(_, &y)| y > 0.0).map(|(&n, &y)| (n.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let c = sxy / sxx;
    let a = (my - c * mx).exp();
    (a.is_finite() && c.is_finite()).then_some((a, c))
}

fn sse(ns: &[f64], values: &[f64], family: Family, p: &[f64]) -> f64 {
    if !admissible(family, p) {
        return f64::INFINITY;
    }
    let s: f64 = ns.iter().zip(values).map(|(&n, &y)| (y - eval(family, p, n)).powi(2)).sum();
    if s.is_finite() {
        s
    } else {
        f64::INFINITY
    }
}

fn levenberg_marquardt(ns: &[f64], values: &[f64], family: Family, start: Vec<f64>) -> Option<LsFit> {
    let k = family.param_count();
    let mut p = start;
    let mut cost = sse(ns, values, family, &p);
    if !cost.is_finite() {
        return None;
    }
    let mut lambda = 1e-3;
    let mut row = vec![0.0; k];
    let mut converged = false;
    let exact = (EXACT_RTOL * values.iter().map(|v| v * v).sum::<f64>().sqrt()).powi(2);

    for _ in 0..MAX_ITER {
        if cost <= exact {
            converged = true;
            break;
        }
        let mut jtj = vec![vec![0.0; k]; k];
        let mut jtr = vec![0.0; k];
        for (&n, &y) in ns.iter().zip(values) {
            gradient(family, &p, n, &mut row);
            let r = y - eval(family, &p, n);
            for i in 0..k {
                jtr[i] += row[i] * r;
                for j in 0..k {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        if jtj.iter().flatten().chain(&jtr).any(|v| !v.is_finite()) {
            return None;
        }
        let rnorm = cost.sqrt();
        let scaled_grad = (0..k)
            .map(|i| if jtj[i][i] > 0.0 { jtr[i].abs() / (jtj[i][i].sqrt() * rnorm) } else { 0.0 })
            .fold(0.0, f64::max);
        if scaled_grad <= GTOL {
            converged = true;
            break;
        }

        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = jtj.clone();
            for i in 0..k {
                damped[i][i] += lambda * if jtj[i][i] > 0.0 { jtj[i][i] } else { 1.0 };
            }
            if let Some(step) = solve_dense(&damped, &jtr) {
                let trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
                let trial_cost = sse(ns, values, family, &trial);
                if trial_cost < cost {
                    let small_step =
                        step.iter().zip(&p).all(|(s, v)| s.abs() <= XTOL * (v.abs() + XTOL));
                    let small_gain = cost - trial_cost <= FTOL * cost;
                    p = trial;
                    cost = trial_cost;
                    lambda = (lambda / 3.0).max(1e-15);
                    accepted = true;
                    if small_step || small_gain {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No descent possible at any damping: a stationary point within
            // floating-point resolution.
            converged = scaled_grad <= 1e-6 || cost <= exact;
            break;
        }
        if converged {
            break;
        }
    }
    Some(LsFit { form: FunctionalForm { family, params: p }, residual_sse: cost, converged })
}

/// Value of the fitted curve at `n_o`.
pub fn extrapolate(fit: &LsFit, n_o: f64) -> Result<f64> {
    if !fit.converged {
        return Err(Error::NotConverged);
    }
    if !(n_o > 0.0) {
        return Err(Error::InvalidInput(format!("n_o = {n_o} must be positive")));
    }
    let v = fit.form.eval(n_o);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..94).map(|i| 35.0 + 5.0 * i as f64).collect()
    }

    fn noiseless(form: &FunctionalForm) -> Vec<f64> {
        grid().iter().map(|&n| form.eval(n)).collect()
    }

    #[test]
    fn power_recovery() {
        let truth = FunctionalForm::new(Family::Power, vec![2.0, 1.5]).unwrap();
        let f = fit(&grid(), &noiseless(&truth), Family::Power).unwrap();
        assert!(f.converged);
        assert!((f.form.params[0] - 2.0).abs() < 1e-6);
        assert!((f.form.params[1] - 1.5).abs() < 1e-6);
        assert!(f.residual_sse < 1e-10);
    }

    #[test]
    fn constant_series_power() {
        let f = fit(&grid(), &vec![5.0; 94], Family::Power).unwrap();
        assert!((f.form.params[0] - 5.0).abs() < 1e-6);
        assert!(f.form.params[1].abs() < 1e-6);
    }

    #[test]
    fn zero_series_is_exact() {
        let f = fit(&grid(), &vec![0.0; 94], Family::Power).unwrap();
        assert_eq!(f.form.params, vec![0.0, 1.0]);
        assert!(f.converged);
        assert_eq!(extrapolate(&f, 1000.0).unwrap(), 0.0);
        let f = fit(&grid(), &vec![0.0; 94], Family::Inverse).unwrap();
        assert_eq!(extrapolate(&f, 1000.0).unwrap(), 0.0);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            fit(&[35.0, 35.0, 35.0], &[1.0, 2.0, 3.0], Family::Power),
            Err(Error::TooFewPoints { points: 1, params: 2 })
        ));
        assert!(matches!(
            fit(&[35.0, 40.0], &[1.0, 2.0], Family::PowerOffset),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(fit(&[35.0, 40.0], &[1.0, f64::NAN], Family::Power), Err(Error::NonFiniteInput)));
    }

    #[test]
    fn extrapolation_closed_forms() {
        let power = LsFit {
            form: FunctionalForm::new(Family::Power, vec![2.0, 1.5]).unwrap(),
            residual_sse: 0.0,
            converged: true,
        };
        assert!((extrapolate(&power, 100.0).unwrap() - 2000.0).abs() < 1e-9);
        let inverse = LsFit {
            form: FunctionalForm::new(Family::Inverse, vec![10.0, 3.0]).unwrap(),
            residual_sse: 0.0,
            converged: true,
        };
        let mut prev = f64::INFINITY;
        for n in [10.0, 100.0, 1e4, 1e6] {
            let v = extrapolate(&inverse, n).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!((prev - 3.0).abs() < 1e-4);
        let dig = LsFit {
            form: FunctionalForm::new(Family::Digamma, vec![1.0, 1.0, 0.0]).unwrap(),
            residual_sse: 0.0,
            converged: true,
        };
        // H_1 = 1
        assert!((extrapolate(&dig, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let stale = LsFit { converged: false, ..power.clone() };
        assert!(matches!(extrapolate(&stale, 10.0), Err(Error::NotConverged)));
        let huge = LsFit {
            form: FunctionalForm::new(Family::Power, vec![1e300, 3.0]).unwrap(),
            ..power
        };
        assert!(matches!(extrapolate(&huge, 1e6), Err(Error::Overflow)));
    }

    #[test]
    fn digamma_at_unit_argument() {
        // a·n = 1 at n = 50: model value is H_1^c + d = 1 + d.
        let form = FunctionalForm::new(Family::Digamma, vec![0.02, 2.3, 0.7]).unwrap();
        let oracle = (EULER_GAMMA + statrs::function::gamma::digamma(2.0)).powf(2.3) + 0.7;
        assert!((form.eval(50.0) - 1.7).abs() < 1e-13);
        assert!((form.eval(50.0) - oracle).abs() < 1e-13);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let cases = [
            (Family::Power, vec![0.7, 1.3]),
            (Family::PowerOffset, vec![0.7, 1.3, -4.0]),
            (Family::Inverse, vec![250.0, 3.0]),
            (Family::Digamma, vec![0.05, 1.8, 2.0]),
        ];
        for (family, p) in cases {
            let mut g = vec![0.0; p.len()];
            for n in [35.0, 260.0, 500.0] {
                gradient(family, &p, n, &mut g);
                for i in 0..p.len() {
                    let h = 1e-6 * p[i].abs().max(1e-3);
                    let mut hi = p.clone();
                    let mut lo = p.clone();
                    hi[i] += h;
                    lo[i] -= h;
                    let fd = (eval(family, &hi, n) - eval(family, &lo, n)) / (2.0 * h);
                    assert!((g[i] - fd).abs() <= 1e-6 * fd.abs().max(1.0), "{family} p{i} n={n}");
                }
            }
        }
    }
}
