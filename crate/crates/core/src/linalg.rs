//! Small dense linear algebra: row-major matrices, Cholesky with jitter
//! escalation, triangular solves.

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Lower-triangular Cholesky factor `L` with `A + jitter·I = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: Matrix,
    jitter: f64,
}

/// Relative jitter levels tried after a plain factorization fails, as
/// multiples of `trace / size`.
pub const JITTER_LEVELS: [f64; 3] = [1e-10, 1e-8, 1e-6];

impl Cholesky {
    /// Factorizes `a`; on failure retries with `JITTER_LEVELS` added to the
    /// diagonal.
    pub fn new(a: &Matrix) -> Result<Self> {
        if let Some(l) = factor(a, 0.0) {
            return Ok(Cholesky { l, jitter: 0.0 });
        }
        let scale = (a.trace() / a.size() as f64).abs().max(f64::MIN_POSITIVE);
        for level in JITTER_LEVELS {
            let jitter = level * scale;
            if let Some(l) = factor(a, jitter) {
                return Ok(Cholesky { l, jitter });
            }
        }
        Err(Error::SingularKernel)
    }

    /// Diagonal jitter that was added (0 when none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        (0..self.l.n).map(|i| self.l.get(i, i).ln()).sum::<f64>() * 2.0
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let s: f64 = (0..i).map(|k| row[k] * y[k]).sum();
            y[i] = (y[i] - s) / row[i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.l.n;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.l.get(k, i) * x[k]).sum();
            x[i] = (x[i] - s) / self.l.get(i, i);
        }
        x
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `(L Lᵀ)⁻¹ = L⁻ᵀ L⁻¹`.
    pub fn inverse(&self) -> Matrix {
        let n = self.l.n;
        // L⁻¹ stored transposed so the inner loops run along rows.
        let mut lit = Matrix::zeros(n);
        for j in 0..n {
            lit.set(j, j, 1.0 / self.l.get(j, j));
            for i in j + 1..n {
                let row = self.l.row(i);
                let col = lit.row(j);
                let s: f64 = (j..i).map(|k| row[k] * col[k]).sum();
                lit.set(j, i, -s / row[i]);
            }
        }
        let mut inv = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let (ri, rj) = (lit.row(i), lit.row(j));
                let s: f64 = (i..n).map(|k| ri[k] * rj[k]).sum();
                inv.set(i, j, s);
                inv.set(j, i, s);
            }
        }
        inv
    }
}

fn factor(a: &Matrix, jitter: f64) -> Option<Matrix> {
    let n = a.n;
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j) + jitter;
        for k in 0..j {
            d -= l.get(j, k).powi(2);
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in j + 1..n {
            let (ri, rj) = (l.row(i), l.row(j));
            let s: f64 = (0..j).map(|k| ri[k] * rj[k]).sum();
            l.set(i, j, (a.get(i, j) - s) / djj);
        }
    }
    Some(l)
}

/// Solves a small dense system by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < f64::MIN_POSITIVE || !m[pivot][col].is_finite() {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = Matrix::from_fn(3, |i, j| if i == j { 4.0 } else { 1.0 });
        let ch = Cholesky::new(&a).unwrap();
        assert_eq!(ch.jitter(), 0.0);
        let x = ch.solve(&[6.0, 6.0, 6.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        // det = (4-1)^2 (4+2) = 54
        assert!((ch.log_det() - 54f64.ln()).abs() < 1e-13);
        let inv = ch.inverse();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| a.get(i, k) * inv.get(k, j)).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn inverse_of_larger_matrix() {
        let n = 20;
        let a = Matrix::from_fn(n, |i, j| {
            1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { n as f64 } else { 0.0 }
        });
        let inv = Cholesky::new(&a).unwrap().inverse();
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| a.get(i, k) * inv.get(k, j)).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rank_deficient_needs_jitter() {
        let a = Matrix::from_fn(4, |_, _| 1.0);
        let ch = Cholesky::new(&a).unwrap();
        assert!(ch.jitter() > 0.0);
        let neg = Matrix::from_fn(2, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(matches!(Cholesky::new(&neg), Err(Error::SingularKernel)));
    }

    #[test]
    fn dense_solve() {
        let a = vec![vec![0.0, 2.0], vec![3.0, 1.0]];
        let x = solve_dense(&a, &[4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(solve_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).is_none());
    }
}
