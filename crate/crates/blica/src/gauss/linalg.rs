//! Small dense matrices with the handful of factorizations the estimators
//! need: Cholesky, LU solves, and a cyclic Jacobi symmetric
//! eigendecomposition. Matrices here are at most a few hundred square, well
//! within Jacobi's comfortable range.

use crate::error::{Error, Result};
use std::ops::{Index, IndexMut};

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from a row-major buffer. Panics if the buffer length does not
    /// match the dimensions.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer does not match dimensions");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t =Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Averages the off-diagonal pairs, forcing exact symmetry.
    pub fn symmetrized(&self) -> Mat {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Lower-triangular Cholesky factor `L` with `L Lᵀ = self`.
    ///
    /// A non-positive pivot signals failure; callers such as the correlation
    /// regularizer rely on that signal rather than treating it as fatal.
    pub fn cholesky(&self) -> Result<Mat> {
        assert!(self.is_square(), "cholesky requires a square matrix");
        let n = self.rows;
        let mut l = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite);
                    }
                    l[(i, i)] = s.sqrt();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Ok(l)
    }

    /// Log-determinant of an SPD matrix through its Cholesky factor.
    pub fn spd_logdet(&self) -> Result<f64> {
        let l = self.cholesky()?;
        Ok(2.0 * (0..self.rows).map(|i| l[(i, i)].ln()).sum::<f64>())
    }

    /// Inverse of an SPD matrix through its Cholesky factor.
    pub fn spd_inverse(&self) -> Result<Mat> {
        self.spd_inverse_and_logdet().map(|(inv, _)| inv)
    }

    /// Inverse and log-determinant of an SPD matrix from one Cholesky
    /// factorization.
    pub fn spd_inverse_and_logdet(&self) -> Result<(Mat, f64)> {
        let l = self.cholesky()?;
        let n = self.rows;
        let logdet = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();
        let mut linv = Mat::zeros(n, n);
        for j in 0..n {
            linv[(j, j)] = 1.0 / l[(j, j)];
            for i in (j + 1)..n {
                let mut s = 0.0;
                for k in j..i {
                    s -= l[(i, k)] * linv[(k, j)];
                }
                linv[(i, j)] = s / l[(i, i)];
            }
        }
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in i.max(j)..n {
                    s += linv[(k, i)] * linv[(k, j)];
                }
                inv[(i, j)] = s;
                inv[(j, i)] = s;
            }
        }
        Ok((inv, logdet))
    }

    /// Solves `self · x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert!(self.is_square() && self.rows == b.len());
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a[(r, col)].abs() > a[(piv, col)].abs() {
                    piv = r;
                }
            }
            if a[(piv, col)].abs() < 1e-14 * self.max_abs().max(1.0) {
                return Err(Error::Singular(format!("pivot {col} vanishes")));
            }
            if piv != col {
                for c in 0..n {
                    let tmp = a[(col, c)];
                    a[(col, c)] = a[(piv, c)];
                    a[(piv, c)] = tmp;
                }
                x.swap(col, piv);
            }
            for r in (col + 1)..n {
                let f = a[(r, col)] / a[(col, col)];
                if f == 0.0 {
                    continue;
                }
                for c in col..n {
                    let v = a[(col, c)];
                    a[(r, c)] -= f * v;
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..n).rev() {
            x[col] /= a[(col, col)];
            for r in 0..col {
                let f = a[(r, col)];
                x[r] -= f * x[col];
            }
        }
        Ok(x)
    }

    /// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues sorted descending and the matching orthonormal
    /// eigenvectors as columns, so `self = V · diag(λ) · Vᵀ`.
    pub fn sym_eigen(&self) -> Result<(Vec<f64>, Mat)> {
        let scale = self.max_abs().max(1.0);
        if !self.is_symmetric(1e-11 * scale) {
            return Err(Error::InvalidParameter(
                "sym_eigen requires a symmetric matrix".into(),
            ));
        }
        let n = self.rows;
        let mut a = self.symmetrized();
        let mut v = Mat::identity(n);
        if n <= 1 {
            return Ok((a.diag(), v));
        }

        const MAX_SWEEPS: usize = 60;
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    off += a[(p, q)].abs();
                }
            }
            if off < 1e-15 * scale * (n * n) as f64 {
                return Ok(sort_eigen_desc(a.diag(), v));
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                        sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);

                    let h = t * apq;
                    a[(p, p)] -= h;
                    a[(q, q)] += h;
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    for j in 0..n {
                        if j != p && j != q {
                            let ajp = a[(j, p)];
                            let ajq = a[(j, q)];
                            a[(j, p)] = ajp - s * (ajq + ajp * tau);
                            a[(p, j)] = a[(j, p)];
                            a[(j, q)] = ajq + s * (ajp - ajq * tau);
                            a[(q, j)] = a[(j, q)];
                        }
                    }
                    for j in 0..n {
                        let vjp = v[(j, p)];
                        let vjq = v[(j, q)];
                        v[(j, p)] = vjp - s * (vjq + vjp * tau);
                        v[(j, q)] = vjq + s * (vjp - vjq * tau);
                    }
                }
            }
        }
        Err(Error::ConvergenceFailure(
            "Jacobi eigendecomposition did not converge".into(),
        ))
    }

    /// 2-norm condition number, `σ_max / σ_min`, computed from the
    /// eigenvalues of `AᵀA`. Returns `f64::INFINITY` for rank-deficient
    /// matrices.
    pub fn condition_number(&self) -> f64 {
        let gram = self.transpose().matmul(self).symmetrized();
        match gram.sym_eigen() {
            Ok((eigs, _)) => {
                let max = eigs.first().copied().unwrap_or(0.0);
                let min = eigs.last().copied().unwrap_or(0.0);
                if min <= 0.0 || max <= 0.0 {
                    f64::INFINITY
                } else {
                    (max / min).sqrt()
                }
            }
            Err(_) => f64::INFINITY,
        }
    }
}

fn sort_eigen_desc(eigs: Vec<f64>, vecs: Mat) -> (Vec<f64>, Mat) {
    let n = eigs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigs[b].partial_cmp(&eigs[a]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
    let mut v = Mat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            v[(r, new)] = vecs[(r, old)];
        }
    }
    (sorted, v)
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.random_range(-2.0..2.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> Mat {
        let b = random_symmetric(n, rng);
        b.matmul(&b.transpose())
            .add(&Mat::identity(n).scale(0.5))
            .symmetrized()
    }

    #[test]
    fn cholesky_identity() {
        let l = Mat::identity(4).cholesky().unwrap();
        assert_eq!(l, Mat::identity(4));
    }

    #[test]
    fn cholesky_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_spd(6, &mut rng);
            let l = a.cholesky().unwrap();
            let diff = l.matmul(&l.transpose()).max_abs_diff(&a);
            assert!(diff <= 1e-10 * a.max_abs(), "reconstruction error {diff}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(m.cholesky(), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn spd_inverse_matches_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_spd(5, &mut rng);
        let inv = a.spd_inverse().unwrap();
        let prod = a.matmul(&inv);
        assert!(prod.max_abs_diff(&Mat::identity(5)) < 1e-9);

        let b: Vec<f64> = (0..5).map(|i| i as f64 - 2.0).collect();
        let x = a.solve(&b).unwrap();
        let x2 = inv.matvec(&b);
        for (u, v) in x.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn solve_rejects_singular() {
        let m = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(m.solve(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn eigen_identity_and_diagonal() {
        let (eigs, _) = Mat::identity(3).sym_eigen().unwrap();
        assert_eq!(eigs, vec![1.0, 1.0, 1.0]);

        let (eigs, _) = Mat::from_diag(&[4.0, 1.0]).sym_eigen().unwrap();
        assert!((eigs[0] - 4.0).abs() < 1e-14 && (eigs[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_reconstructs_random_6x6() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_symmetric(6, &mut rng);
            let (eigs, v) = a.sym_eigen().unwrap();
            // sorted descending
            for w in eigs.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let recon = v.matmul(&Mat::from_diag(&eigs)).matmul(&v.transpose());
            let err = recon.max_abs_diff(&a);
            assert!(err <= 1e-10 * a.max_abs().max(1.0), "reconstruction {err}");
        }
    }

    #[test]
    fn eigen_vectors_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = random_symmetric(8, &mut rng);
            let (_, v) = a.sym_eigen().unwrap();
            let g = v.transpose().matmul(&v);
            assert!(g.max_abs_diff(&Mat::identity(8)) < 1e-10);
        }
    }

    #[test]
    fn condition_number_of_scaled_identity() {
        let m = Mat::from_diag(&[3.0, 3.0, 3.0]);
        assert!((m.condition_number() - 1.0).abs() < 1e-10);
        let m = Mat::from_diag(&[4.0, 1.0]);
        assert!((m.condition_number() - 4.0).abs() < 1e-10);
    }
}
