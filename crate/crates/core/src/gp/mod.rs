//! Gaussian-process extrapolation of tracked summaries.
//!
//! The mean function is `a·nᶜ`; the covariance combines a warped dot-product
//! kernel with an optional squared-exponential term and white noise. Mean
//! and kernel parameters are estimated jointly by maximizing the log
//! posterior (normal priors on `a, c` centred at the least-squares fit,
//! positively truncated standard normal priors on the kernel parameters).

mod kernel;

pub use kernel::{kernel_value, signal_value, GpHyper, KernelFamily, KernelSpec, Warp, ALPHA_MIN};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, Cholesky, Matrix};
use crate::lsfit::{Family, LsFit};
use crate::optim::{minimize, Bounds, Options};

pub const MIN_POINTS: usize = 5;

/// Normal priors on the mean parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanPrior {
    pub center: [f64; 2],
    pub sd: [f64; 2],
}

impl MeanPrior {
    /// Centred at the estimates with sd `max(|estimate|, 1)`.
    pub fn around(a: f64, c: f64) -> Self {
        MeanPrior { center: [a, c], sd: [a.abs().max(1.0), c.abs().max(1.0)] }
    }
}

#[derive(Debug, Clone)]
pub struct GpFit {
    pub spec: KernelSpec,
    pub mean_params: [f64; 2],
    pub hyper: GpHyper,
    pub prior: MeanPrior,
    pub log_posterior: f64,
    pub converged: bool,
    ns: Vec<f64>,
    values: Vec<f64>,
    chol: Cholesky,
    /// `K⁻¹ (s − μ)`
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpPredictive {
    pub mean: f64,
    pub variance: f64,
}

fn mean_fn(p: [f64; 2], n: f64) -> f64 {
    p[0] * n.powf(p[1])
}

/// Smallest gap between consecutive distinct checkpoints.
pub fn min_spacing(ns: &[f64]) -> f64 {
    let mut sorted = ns.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min)
}

fn check_inputs(ns: &[f64], values: &[f64]) -> Result<()> {
    if ns.len() != values.len() {
        return Err(Error::LengthMismatch(ns.len(), values.len()));
    }
    if ns.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if ns.iter().any(|&n| n <= 0.0) {
        return Err(Error::InvalidInput("node counts must be positive".into()));
    }
    let distinct = {
        let mut s = ns.to_vec();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s.len()
    };
    if distinct < MIN_POINTS || distinct != ns.len() {
        return Err(Error::TooFewPoints { points: distinct, params: MIN_POINTS });
    }
    Ok(())
}

/// Index layout of the optimization vector.
const A: usize = 0;
const C: usize = 1;
const ALPHA: usize = 2;
const GAMMA: usize = 3;
const BETA: usize = 4;
const RHO: usize = 5;
const SIGMA2: usize = 6;
const DIM: usize = 7;

fn hyper_of(x: &[f64]) -> GpHyper {
    GpHyper { alpha: x[ALPHA], gamma: x[GAMMA], beta: x[BETA], rho: x[RHO], sigma2: x[SIGMA2] }
}

struct Problem<'a> {
    ns: &'a [f64],
    values: &'a [f64],
    spec: KernelSpec,
    prior: MeanPrior,
    /// w(nᵢ)·w(nⱼ)
    ww: Matrix,
    /// (nᵢ − nⱼ)²
    d2: Matrix,
}

impl<'a> Problem<'a> {
    fn new(ns: &'a [f64], values: &'a [f64], spec: KernelSpec, prior: MeanPrior) -> Self {
        let m = ns.len();
        let w: Vec<f64> = ns.iter().map(|&n| spec.warp.apply(n)).collect();
        Problem {
            ns,
            values,
            spec,
            prior,
            ww: Matrix::from_fn(m, |i, j| w[i] * w[j]),
            d2: Matrix::from_fn(m, |i, j| (ns[i] - ns[j]).powi(2)),
        }
    }

    fn gram(&self, h: &GpHyper) -> Matrix {
        let m = self.ns.len();
        Matrix::from_fn(m, |i, j| {
            let lin = h.alpha * self.ww.get(i, j) + h.gamma;
            let rbf = || (-self.d2.get(i, j) / (2.0 * h.rho * h.rho)).exp();
            let signal = match self.spec.family {
                KernelFamily::LinearOnly => lin,
                KernelFamily::LinearPlusRbf => lin + h.beta * rbf(),
                KernelFamily::LinearTimesRbf => lin * rbf(),
            };
            signal + if i == j { h.sigma2 } else { 0.0 }
        })
    }

    fn log_prior(&self, x: &[f64]) -> f64 {
        let mut lp = 0.0;
        for k in 0..2 {
            lp -= 0.5 * ((x[k] - self.prior.center[k]) / self.prior.sd[k]).powi(2);
        }
        let kernel_params: &[usize] =
            if self.spec.family.has_rbf() { &[ALPHA, GAMMA, BETA, RHO, SIGMA2] } else { &[ALPHA, GAMMA, SIGMA2] };
        for &k in kernel_params {
            lp -= 0.5 * x[k] * x[k];
        }
        lp
    }

    /// Log posterior (up to the prior normalizing constants) and, when
    /// requested, its gradient.
    fn evaluate(&self, x: &[f64], grad: Option<&mut [f64]>) -> Result<(f64, Cholesky, Vec<f64>)> {
        let m = self.ns.len();
        let h = hyper_of(x);
        let p = [x[A], x[C]];
        let k = self.gram(&h);
        let chol = Cholesky::new(&k)?;
        let resid: Vec<f64> = self.ns.iter().zip(self.values).map(|(&n, &s)| s - mean_fn(p, n)).collect();
        let weights = chol.solve(&resid);
        let quad: f64 = resid.iter().zip(&weights).map(|(r, w)| r * w).sum();
        let loglik = -0.5 * quad - 0.5 * chol.log_det() - 0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln();
        let value = loglik + self.log_prior(x);
        if !value.is_finite() {
            return Err(Error::SingularKernel);
        }

        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v = 0.0);
            for (t, &n) in self.ns.iter().enumerate() {
                let nc = n.powf(p[1]);
                g[A] += nc * weights[t];
                g[C] += p[0] * nc * n.ln() * weights[t];
            }
            for kk in 0..2 {
                g[kk] -= (x[kk] - self.prior.center[kk]) / self.prior.sd[kk].powi(2);
            }
            let kinv = chol.inverse();
            // ∂/∂θ = ½ wᵀ (∂K) w − ½ tr(K⁻¹ ∂K)
            let mut acc = [0.0; DIM];
            for i in 0..m {
                for j in 0..m {
                    let outer = 0.5 * (weights[i] * weights[j] - kinv.get(i, j));
                    let ww = self.ww.get(i, j);
                    let d2 = self.d2.get(i, j);
                    match self.spec.family {
                        KernelFamily::LinearOnly => {
                            acc[ALPHA] += outer * ww;
                            acc[GAMMA] += outer;
                        }
                        KernelFamily::LinearPlusRbf => {
                            let e = (-d2 / (2.0 * h.rho * h.rho)).exp();
                            acc[ALPHA] += outer * ww;
                            acc[GAMMA] += outer;
                            acc[BETA] += outer * e;
                            acc[RHO] += outer * h.beta * e * d2 / h.rho.powi(3);
                        }
                        KernelFamily::LinearTimesRbf => {
                            let e = (-d2 / (2.0 * h.rho * h.rho)).exp();
                            let lin = h.alpha * ww + h.gamma;
                            acc[ALPHA] += outer * ww * e;
                            acc[GAMMA] += outer * e;
                            acc[RHO] += outer * lin * e * d2 / h.rho.powi(3);
                        }
                    }
                }
                acc[SIGMA2] += 0.5 * (weights[i] * weights[i] - kinv.get(i, i));
            }
            for kk in ALPHA..DIM {
                g[kk] = acc[kk];
            }
            g[ALPHA] -= x[ALPHA];
            g[GAMMA] -= x[GAMMA];
            g[SIGMA2] -= x[SIGMA2];
            if self.spec.family.has_rbf() {
                g[BETA] -= x[BETA];
                g[RHO] -= x[RHO];
            }
        }
        Ok((value, chol, weights))
    }
}

fn pow2_scale(v: f64) -> f64 {
    if !(v.is_finite() && v > 0.0) {
        return 1.0;
    }
    2f64.powi(v.log2().round().clamp(-1000.0, 1000.0) as i32)
}

impl GpFit {
    /// Builds a fit with the given mean parameters and hyperparameters, with
    /// the mean prior centred at `mean_params`.
    pub fn with_hyper(
        ns: &[f64],
        values: &[f64],
        spec: KernelSpec,
        mean_params: [f64; 2],
        hyper: GpHyper,
    ) -> Result<GpFit> {
        check_inputs(ns, values)?;
        hyper.validate(spec.family, min_spacing(ns))?;
        let prior = MeanPrior::around(mean_params[0], mean_params[1]);
        Self::assemble(ns, values, spec, prior, mean_params, hyper, true)
    }

    fn assemble(
        ns: &[f64],
        values: &[f64],
        spec: KernelSpec,
        prior: MeanPrior,
        mean_params: [f64; 2],
        hyper: GpHyper,
        converged: bool,
    ) -> Result<GpFit> {
        let problem = Problem::new(ns, values, spec, prior);
        let x = [mean_params[0], mean_params[1], hyper.alpha, hyper.gamma, hyper.beta, hyper.rho, hyper.sigma2];
        let (log_posterior, chol, weights) = problem.evaluate(&x, None)?;
        Ok(GpFit {
            spec,
            mean_params,
            hyper,
            prior,
            log_posterior,
            converged,
            ns: ns.to_vec(),
            values: values.to_vec(),
            chol,
            weights,
        })
    }

    pub fn checkpoints(&self) -> &[f64] {
        &self.ns
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Diagonal jitter the Cholesky factorization needed.
    pub fn jitter(&self) -> f64 {
        self.chol.jitter()
    }

    pub fn mean_at(&self, n: f64) -> f64 {
        mean_fn(self.mean_params, n)
    }

    /// Residuals `(s − μ)/√K_tt` on the training grid.
    pub fn standardized_residuals(&self) -> Vec<f64> {
        self.ns
            .iter()
            .zip(&self.values)
            .map(|(&n, &s)| (s - self.mean_at(n)) / kernel_value(self.spec, &self.hyper, n, n).sqrt())
            .collect()
    }
}

/// Starting hyperparameters, scaled to the least-squares residuals.
fn starts(ns: &[f64], values: &[f64], spec: KernelSpec, a: f64, c: f64, spacing: f64) -> Vec<GpHyper> {
    let m = ns.len() as f64;
    let resid: Vec<f64> = ns.iter().zip(values).map(|(&n, &s)| s - mean_fn([a, c], n)).collect();
    let var = (resid.iter().map(|r| r * r).sum::<f64>() / m).max(1e-12);
    let w2 = ns.iter().map(|&n| spec.warp.apply(n).powi(2)).sum::<f64>() / m;
    let range = ns.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ns.iter().cloned().fold(f64::INFINITY, f64::min);
    let alpha = (0.5 * var / w2).max(ALPHA_MIN);
    vec![
        GpHyper { alpha, gamma: 0.0, beta: 0.5 * var, rho: (10.0 * spacing).max(spacing), sigma2: 0.1 * var },
        GpHyper { alpha, gamma: 0.1 * var, beta: var, rho: (range / 4.0).max(spacing), sigma2: 0.01 * var },
        GpHyper { alpha: ALPHA_MIN, gamma: 0.0, beta: var, rho: 3.0 * spacing, sigma2: 0.5 * var },
        GpHyper { alpha: 1.0f64.max(ALPHA_MIN), gamma: 1.0, beta: 1.0, rho: spacing, sigma2: 1.0 },
    ]
}

/// Maximum a posteriori fit from fixed starting points.
pub fn fit_map(ns: &[f64], values: &[f64], spec: KernelSpec, ls_init: &LsFit) -> Result<GpFit> {
    check_inputs(ns, values)?;
    if !ls_init.converged {
        return Err(Error::NotConverged);
    }
    if !matches!(ls_init.form.family, Family::Power | Family::PowerOffset) {
        return Err(Error::InvalidInput(format!(
            "GP mean needs a power-law initialization, got {}",
            ls_init.form.family
        )));
    }
    let (a0, c0) = (ls_init.form.params[0], ls_init.form.params[1]);
    let prior = MeanPrior::around(a0, c0);
    let spacing = min_spacing(ns);
    let problem = Problem::new(ns, values, spec, prior);

    let mut lower = vec![f64::NEG_INFINITY, f64::NEG_INFINITY, ALPHA_MIN, 0.0, 0.0, spacing, 0.0];
    let mut upper = vec![f64::INFINITY; DIM];
    if !spec.family.has_rbf() {
        lower[BETA] = 0.0;
        upper[BETA] = 0.0;
        lower[RHO] = spacing;
        upper[RHO] = spacing;
    }
    if spec.family == KernelFamily::LinearTimesRbf {
        lower[BETA] = 0.0;
        upper[BETA] = 0.0;
    }

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for mut h in starts(ns, values, spec, a0, c0, spacing) {
        if !spec.family.has_rbf() {
            h.rho = spacing;
        }
        if spec.family != KernelFamily::LinearPlusRbf {
            h.beta = 0.0;
        }
        let x0 = [a0, c0, h.alpha, h.gamma, h.beta, h.rho, h.sigma2];
        let scale: Vec<f64> = x0
            .iter()
            .enumerate()
            .map(|(i, &v)| match i {
                C => 1.0,
                RHO => pow2_scale(spacing),
                _ => pow2_scale(v.abs()),
            })
            .collect();
        let z0: Vec<f64> = x0.iter().zip(&scale).map(|(v, s)| v / s).collect();
        let zb = Bounds {
            lower: lower.iter().zip(&scale).map(|(v, s)| v / s).collect(),
            upper: upper.iter().zip(&scale).map(|(v, s)| v / s).collect(),
        };
        let to_x = |z: &[f64]| -> Vec<f64> {
            (0..DIM).map(|i| (z[i] * scale[i]).clamp(lower[i], upper[i])).collect()
        };
        let mut gx = vec![0.0; DIM];
        let objective = |z: &[f64], gz: &mut [f64]| -> f64 {
            let x = to_x(z);
            match problem.evaluate(&x, Some(&mut gx)) {
                Ok((v, _, _)) => {
                    for i in 0..DIM {
                        gz[i] = -gx[i] * scale[i];
                    }
                    -v
                }
                Err(_) => f64::INFINITY,
            }
        };
        let opts = Options { max_iter: 250, gtol: 1e-5, ftol: 1e-13 };
        let result = minimize(objective, &z0, &zb, opts);
        if !result.value.is_finite() {
            continue;
        }
        let x = to_x(&result.x);
        let lp = -result.value;
        if best.as_ref().is_none_or(|(_, b, _)| lp > *b) {
            best = Some((x, lp, result.converged));
        }
    }
    let (x, _, converged) = best.ok_or(Error::SingularKernel)?;
    GpFit::assemble(ns, values, spec, prior, [x[A], x[C]], hyper_of(&x), converged)
}

/// Log posterior of the least-squares starting point with the first default
/// hyperparameter start, for comparison against the optimum.
pub fn log_posterior_at_start(ns: &[f64], values: &[f64], spec: KernelSpec, ls_init: &LsFit) -> Result<f64> {
    check_inputs(ns, values)?;
    let (a0, c0) = (ls_init.form.params[0], ls_init.form.params[1]);
    let spacing = min_spacing(ns);
    let mut h = starts(ns, values, spec, a0, c0, spacing)[0];
    if !spec.family.has_rbf() {
        h.rho = spacing;
    }
    if spec.family != KernelFamily::LinearPlusRbf {
        h.beta = 0.0;
    }
    let problem = Problem::new(ns, values, spec, MeanPrior::around(a0, c0));
    let x = [a0, c0, h.alpha, h.gamma, h.beta, h.rho, h.sigma2];
    Ok(problem.evaluate(&x, None)?.0)
}

/// Predictive distribution of the realized summary at `n_o`.
pub fn predict(fit: &GpFit, n_o: f64) -> Result<GpPredictive> {
    if !(n_o > 0.0) || !n_o.is_finite() {
        return Err(Error::InvalidInput(format!("n_o = {n_o} must be positive")));
    }
    let kstar: Vec<f64> = fit.ns.iter().map(|&n| signal_value(fit.spec, &fit.hyper, n_o, n)).collect();
    let mean = fit.mean_at(n_o) + kstar.iter().zip(&fit.weights).map(|(k, w)| k * w).sum::<f64>();
    let variance = match basis_variance(fit, n_o) {
        Some(v) => v,
        None => {
            let v = fit.chol.solve_lower(&kstar);
            let explained: f64 = v.iter().map(|x| x * x).sum();
            signal_value(fit.spec, &fit.hyper, n_o, n_o) - explained
        }
    } + fit.hyper.sigma2;
    if !mean.is_finite() || !variance.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(GpPredictive { mean, variance: variance.max(f64::MIN_POSITIVE) })
}

/// Noise-free predictive variance with the dot-product term treated as
/// explicit basis functions `w(n)` and `1` with independent normal weights.
/// Avoids subtracting two nearly equal quantities when `α·w(n_o)²` dwarfs the
/// posterior variance. `None` when the kernel has no such split or the
/// remaining covariance is not positive definite.
fn basis_variance(fit: &GpFit, n_o: f64) -> Option<f64> {
    let h = &fit.hyper;
    let ns = &fit.ns;
    let m = ns.len();
    let with_rbf = match fit.spec.family {
        KernelFamily::LinearOnly => false,
        KernelFamily::LinearPlusRbf => true,
        KernelFamily::LinearTimesRbf => return None,
    };
    let e = |x: f64, y: f64| (-(x - y).powi(2) / (2.0 * h.rho * h.rho)).exp();
    let r = Matrix::from_fn(m, |i, j| {
        let rbf = if with_rbf { h.beta * e(ns[i], ns[j]) } else { 0.0 };
        rbf + if i == j { h.sigma2 } else { 0.0 }
    });
    let chol = Cholesky::new(&r).ok().filter(|c| c.jitter() == 0.0)?;
    let rstar: Vec<f64> = ns.iter().map(|&n| if with_rbf { h.beta * e(n_o, n) } else { 0.0 }).collect();
    let rss = if with_rbf { h.beta } else { 0.0 };
    let ri_rstar = chol.solve(&rstar);
    let base = rss - rstar.iter().zip(&ri_rstar).map(|(a, b)| a * b).sum::<f64>();

    let warp = fit.spec.warp;
    let mut basis: Vec<(Vec<f64>, f64, f64)> = vec![(ns.iter().map(|&n| warp.apply(n)).collect(), warp.apply(n_o), h.alpha)];
    if h.gamma > 0.0 {
        basis.push((vec![1.0; m], 1.0, h.gamma));
    }
    let p = basis.len();
    let ri_phi: Vec<Vec<f64>> = basis.iter().map(|(col, _, _)| chol.solve(col)).collect();
    let mut a = vec![vec![0.0; p]; p];
    let mut z = vec![0.0; p];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = basis[i].0.iter().zip(&ri_phi[j]).map(|(x, y)| x * y).sum();
        }
        a[i][i] += 1.0 / basis[i].2;
        z[i] = basis[i].1 - basis[i].0.iter().zip(&ri_rstar).map(|(x, y)| x * y).sum::<f64>();
    }
    let sol = solve_dense(&a, &z)?;
    let quad: f64 = z.iter().zip(&sol).map(|(x, y)| x * y).sum();
    let v = base.max(0.0) + quad;
    v.is_finite().then_some(v)
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation between two summaries' standardized residuals over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryCorrelation {
    pub value: f64,
    /// Set when a residual vector had zero variance and `value` fell back to 0.
    pub degenerate: bool,
}

pub fn summary_correlation(first: &GpFit, second: &GpFit) -> Result<SummaryCorrelation> {
    if first.ns != second.ns {
        return Err(Error::InvalidInput("summaries tracked on different grids".into()));
    }
    Ok(match pearson(&first.standardized_residuals(), &second.standardized_residuals()) {
        Some(value) => SummaryCorrelation { value, degenerate: false },
        None => SummaryCorrelation { value: 0.0, degenerate: true },
    })
}
