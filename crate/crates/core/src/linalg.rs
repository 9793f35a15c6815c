//! Small dense linear algebra: Cholesky for Gaussian sampling and pivoted
//! LU for determinants and quadratic forms.

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// v^T M v.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        v.iter().zip(self.mul_vec(v)).map(|(a, b)| a * b).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

/// Lower-triangular Cholesky factor L with M = L Lᵀ.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn new(m: &Matrix) -> Result<Self> {
        let n = m.dim();
        let mut l = Matrix::zeros(n);
        for j in 0..n {
            let mut diag = m.get(j, j);
            for k in 0..j {
                diag -= l.get(j, k) * l.get(j, k);
            }
            if !(diag > 0.0) {
                return Err(Error::Singular(format!(
                    "non-positive pivot {diag:e} at row {j}"
                )));
            }
            let d = diag.sqrt();
            l.set(j, j, d);
            for i in j + 1..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / d);
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// out = L z.
    pub fn apply_lower(&self, z: &[f64], out: &mut [f64]) {
        let n = self.l.dim();
        for i in 0..n {
            let row = &self.l.data[i * n..i * n + i + 1];
            out[i] = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(m: &Matrix) -> Result<Self> {
        let n = m.dim();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = m.data.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| lu.get(a, k).abs().total_cmp(&lu.get(b, k).abs()))
                .unwrap();
            if lu.get(p, k).abs() <= 1e-13 * scale {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                for j in 0..n {
                    let t = lu.get(k, j);
                    lu.set(k, j, lu.get(p, j));
                    lu.set(p, j, t);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let f = lu.get(i, k) / pivot;
                lu.set(i, k, f);
                for j in k + 1..n {
                    lu.set(i, j, lu.get(i, j) - f * lu.get(k, j));
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        (0..self.lu.dim()).fold(self.sign, |acc, i| acc * self.lu.get(i, i))
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu.get(i, j) * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu.get(i, j) * x[j];
            }
            x[i] /= self.lu.get(i, i);
        }
        x
    }

    /// bᵀ M⁻¹ b.
    pub fn inverse_quadratic_form(&self, b: &[f64]) -> f64 {
        b.iter().zip(self.solve(b)).map(|(a, c)| a * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd() -> Matrix {
        Matrix::from_fn(3, |i, j| if i == j { 4.0 } else { 1.0 / (1.0 + (i + j) as f64) })
    }

    #[test]
    fn cholesky_reconstructs() {
        let m = spd();
        let c = Cholesky::new(&m).unwrap();
        let l = c.factor();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| l.get(i, k) * l.get(j, k)).sum();
                assert!((s - m.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lu_det_and_solve() {
        let m = Matrix::from_fn(3, |i, j| [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]][i][j]);
        let lu = Lu::new(&m).unwrap();
        // det = 0(1) - 2(1 - 0) + 1(0 - 3) = -5
        assert!((lu.det() + 5.0).abs() < 1e-14);
        let x = lu.solve(&[1.0, 2.0, 3.0]);
        let b = m.mul_vec(&x);
        for (a, e) in b.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_detected() {
        let m = Matrix::from_fn(2, |i, j| ((i + 1) * (j + 1)) as f64);
        assert!(Lu::new(&m).is_err());
        assert!(Cholesky::new(&m).is_err());
    }
}
