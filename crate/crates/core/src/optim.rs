//! Box-constrained quasi-Newton minimization (projected BFGS with an
//! active set and Armijo backtracking along the projected path).

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn lower_only(lower: Vec<f64>) -> Self {
        let upper = vec![f64::INFINITY; lower.len()];
        Bounds { lower, upper }
    }

    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub max_iter: usize,
    /// Stop when the largest free gradient component is below this.
    pub gtol: f64,
    /// Stop when the relative decrease of the objective is below this.
    pub ftol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { max_iter: 500, gtol: 1e-8, ftol: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

/// Minimizes `f` subject to `bounds`. `f` returns the value and writes the
/// gradient; a non-finite value marks an infeasible point and triggers
/// backtracking.
pub fn minimize<F>(mut f: F, x0: &[f64], bounds: &Bounds, opts: Options) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if !fx.is_finite() {
        return Minimum { x, value: fx, iterations: 0, converged: false };
    }
    let mut h = identity(n);
    let mut fresh = true;
    let mut g_new = vec![0.0; n];
    let mut prev_free: Vec<bool> = Vec::new();

    for iter in 0..opts.max_iter {
        let free: Vec<bool> = (0..n)
            .map(|i| {
                let at_lower = x[i] <= bounds.lower[i] && g[i] > 0.0;
                let at_upper = x[i] >= bounds.upper[i] && g[i] < 0.0;
                !(at_lower || at_upper) && bounds.lower[i] < bounds.upper[i]
            })
            .collect();
        let pg = (0..n).filter(|&i| free[i]).map(|i| g[i].abs()).fold(0.0, f64::max);
        if pg <= opts.gtol {
            return Minimum { x, value: fx, iterations: iter, converged: true };
        }
        if free != prev_free {
            // Curvature gathered with a different active set is misleading.
            let scale = if fresh { 1.0 } else { diag_mean(&h, &free) };
            h = scaled_identity(n, scale);
            prev_free = free.clone();
        }

        let mut d = direction(&h, &g, &free);
        let mut slope: f64 = (0..n).map(|i| g[i] * d[i]).sum();
        if !(slope < 0.0) {
            h = identity(n);
            fresh = true;
            d = direction(&h, &g, &free);
            slope = (0..n).map(|i| g[i] * d[i]).sum();
        }
        let dnorm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut t = if fresh { (1.0 / dnorm).min(1.0) } else { 1.0 };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let mut trial: Vec<f64> = (0..n).map(|i| x[i] + t * d[i]).collect();
            bounds.project(&mut trial);
            let decrease: f64 = (0..n).map(|i| g[i] * (trial[i] - x[i])).sum();
            let ft = f(&trial, &mut g_new);
            if ft.is_finite() && ft <= fx + ARMIJO * decrease.min(0.0) && ft <= fx {
                accepted = Some((trial, ft));
                break;
            }
            // Minimizer of the quadratic through f(x), the slope and f(trial),
            // kept within [0.1 t, 0.5 t].
            let next = if ft.is_finite() {
                let denom = 2.0 * (ft - fx - slope * t);
                if denom > 0.0 { -slope * t * t / denom } else { 0.5 * t }
            } else {
                0.1 * t
            };
            t = next.clamp(0.1 * t, 0.5 * t);
        }
        let Some((x_new, f_new)) = accepted else {
            // No progress along a descent direction: stationary to working precision.
            return Minimum { x, value: fx, iterations: iter, converged: slope.abs() <= 1e-10 * (1.0 + fx.abs()) };
        };

        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        let ss = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > 1e-12 * ss * yy.sqrt() {
            if fresh {
                h = scaled_identity(n, sy / yy);
                fresh = false;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }

        let rel = (fx - f_new).abs() / fx.abs().max(f_new.abs()).max(1.0);
        x = x_new;
        fx = f_new;
        std::mem::swap(&mut g, &mut g_new);
        if rel <= opts.ftol && ss <= 1e-14 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()) {
            return Minimum { x, value: fx, iterations: iter + 1, converged: true };
        }
        if rel == 0.0 && ss == 0.0 {
            return Minimum { x, value: fx, iterations: iter + 1, converged: true };
        }
    }
    Minimum { x, value: fx, iterations: opts.max_iter, converged: false }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    scaled_identity(n, 1.0)
}

fn scaled_identity(n: usize, v: f64) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { v } else { 0.0 }).collect()).collect()
}

fn diag_mean(h: &[Vec<f64>], free: &[bool]) -> f64 {
    let vals: Vec<f64> = (0..h.len()).filter(|&i| free[i]).map(|i| h[i][i]).filter(|v| *v > 0.0).collect();
    if vals.is_empty() {
        1.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

fn direction(h: &[Vec<f64>], g: &[f64], free: &[bool]) -> Vec<f64> {
    let n = g.len();
    (0..n)
        .map(|i| {
            if !free[i] {
                return 0.0;
            }
            -(0..n).filter(|&j| free[j]).map(|j| h[i][j] * g[j]).sum::<f64>()
        })
        .collect()
}

fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i][j] * y[j]).sum()).collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    #[test]
    fn unconstrained_rosenbrock() {
        let b = Bounds::lower_only(vec![f64::NEG_INFINITY; 2]);
        let m = minimize(rosenbrock, &[-1.2, 1.0], &b, Options::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn active_bound_is_hit_exactly() {
        // Minimum of (x - 0.01)² + (y - 2)² with x ≥ 0.05.
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 0.01);
            g[1] = 2.0 * (x[1] - 2.0);
            (x[0] - 0.01).powi(2) + (x[1] - 2.0).powi(2)
        };
        let b = Bounds::lower_only(vec![0.05, 0.0]);
        let m = minimize(f, &[3.0, 0.5], &b, Options::default());
        assert_eq!(m.x[0], 0.05);
        assert!((m.x[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn fixed_variable_stays_put() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            g[1] = 2.0 * (x[1] - 1.0);
            x[0] * x[0] + (x[1] - 1.0).powi(2)
        };
        let b = Bounds { lower: vec![0.5, f64::NEG_INFINITY], upper: vec![0.5, f64::INFINITY] };
        let m = minimize(f, &[0.5, 7.0], &b, Options::default());
        assert_eq!(m.x[0], 0.5);
        assert!((m.x[1] - 1.0).abs() < 1e-8);
    }
}
