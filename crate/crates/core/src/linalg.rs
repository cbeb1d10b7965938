//! Small dense linear algebra: real and complex matrices, cyclic Jacobi
//! eigensolvers and a one-sided Jacobi SVD.
//!
//! Every matrix in this crate is at most 8×8 (the 2-qubit ansatz has eight
//! parameters), so plain `Vec<f64>` storage and Jacobi rotations are both
//! accurate and fast enough.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Convergence threshold on the off-diagonal Frobenius norm, relative to
/// `max(1, ‖A‖_F)`.
pub const JACOBI_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
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

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.as_ref().len(), c, "ragged rows");
            data.extend_from_slice(row.as_ref());
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
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

    pub fn sub(&self, other: &Mat) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
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

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Mat) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        Mat::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the same order as `values`.
    pub vectors: Mat,
}

/// Cyclic Jacobi eigensolver for a real symmetric matrix. Only the upper
/// triangle's symmetric part is used implicitly; callers check symmetry.
pub fn sym_eigen(a: &Mat) -> SymEigen {
    assert!(a.is_square(), "sym_eigen needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymEigen { values, vectors }
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`, `s` descending.
///
/// For an `m×n` input with `m ≥ n`, `u` is `m×n`; otherwise `u` is `m×m`
/// and `v` is `n×m`. When `A` is square, `u` and `v` are full orthogonal
/// matrices even if `A` is rank deficient.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

impl Svd {
    pub fn reconstruct(&self) -> Mat {
        let k = self.s.len();
        let mut us = self.u.clone();
        for i in 0..us.rows {
            for j in 0..k {
                us[(i, j)] *= self.s[j];
            }
        }
        us.matmul(&self.v.transpose())
    }

    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.s.iter().filter(|&&x| x > tol).count()
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &Mat) -> Svd {
    if a.rows < a.cols {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let (m, n) = (a.rows, a.cols);
    let mut u = a.clone();
    let mut v = Mat::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for k in 0..m {
                    alpha += u[(k, p)] * u[(k, p)];
                    beta += u[(k, q)] * u[(k, q)];
                    gamma += u[(k, p)] * u[(k, q)];
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let (up, uq) = (u[(k, p)], u[(k, q)]);
                    u[(k, p)] = c * up - s * uq;
                    u[(k, q)] = s * up + c * uq;
                }
                for k in 0..n {
                    let (vp, vq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vp - s * vq;
                    v[(k, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|k| u[(k, j)] * u[(k, j)]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v_sorted = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    let smax = s.first().copied().unwrap_or(0.0);
    let tiny = f64::EPSILON * smax.max(f64::MIN_POSITIVE) * (m as f64);

    let mut u_sorted = Mat::zeros(m, n);
    let mut filled = Vec::with_capacity(n);
    for (c, &j) in order.iter().enumerate() {
        if norms[j] > tiny {
            for k in 0..m {
                u_sorted[(k, c)] = u[(k, j)] / norms[j];
            }
            filled.push(c);
        }
    }
    complete_orthonormal_columns(&mut u_sorted, &filled);

    Svd {
        u: u_sorted,
        s,
        v: v_sorted,
    }
}

/// Fills every column not listed in `filled` with a unit vector orthogonal
/// to all columns filled so far (Gram–Schmidt over the standard basis).
fn complete_orthonormal_columns(u: &mut Mat, filled: &[usize]) {
    let m = u.rows;
    let mut done: Vec<usize> = filled.to_vec();
    for c in 0..u.cols {
        if done.contains(&c) {
            continue;
        }
        let mut best: Option<Vec<f64>> = None;
        let mut best_norm = 0.0;
        for e in 0..m {
            let mut w = vec![0.0; m];
            w[e] = 1.0;
            for _ in 0..2 {
                for &d in &done {
                    let dot: f64 = (0..m).map(|k| w[k] * u[(k, d)]).sum();
                    for (k, wk) in w.iter_mut().enumerate() {
                        *wk -= dot * u[(k, d)];
                    }
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = Some(w);
            }
        }
        if let Some(w) = best.filter(|_| best_norm > 1e-8) {
            for k in 0..m {
                u[(k, c)] = w[k] / best_norm;
            }
            done.push(c);
        }
    }
}

/// Moore–Penrose pseudoinverse; singular values `≤ tol` are treated as zero.
pub fn pinv(a: &Mat, tol: f64) -> Mat {
    let d = svd(a);
    let k = d.s.len();
    let mut out = Mat::zeros(a.cols, a.rows);
    for r in 0..k {
        if d.s[r] <= tol {
            continue;
        }
        let inv = 1.0 / d.s[r];
        for i in 0..a.cols {
            let vi = d.v[(i, r)] * inv;
            if vi == 0.0 {
                continue;
            }
            for j in 0..a.rows {
                out[(i, j)] += vi * d.u[(j, r)];
            }
        }
    }
    out
}

/// 2-norm condition number `s_max / s_min` (infinite when singular).
pub fn condition_number(a: &Mat) -> f64 {
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let smin = d.s.last().copied().unwrap_or(0.0);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn inverse(a: &Mat) -> Result<Mat> {
    if !a.is_square() {
        return Err(Error::Dimension {
            expected: a.rows,
            found: a.cols,
        });
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut inv = Mat::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap_or(col);
        if m[(pivot, col)].abs() <= f64::EPSILON * scale {
            return Err(Error::Numeric(format!("singular matrix at column {col}")));
        }
        if pivot != col {
            for j in 0..n {
                m.data.swap(pivot * n + j, col * n + j);
                inv.data.swap(pivot * n + j, col * n + j);
            }
        }
        let p = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[(i, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[(i, j)] -= f * m[(col, j)];
                inv[(i, j)] -= f * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", &self.data[i * self.n..(i + 1) * self.n])?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Panics unless `entries.len() == n*n`.
    pub fn from_slice(n: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), n * n);
        Self {
            n,
            data: entries.to_vec(),
        }
    }

    pub fn from_real(n: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), n * n);
        Self {
            n,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        CMat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        CMat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// `self ⊗ other`, with `self` acting on the most significant index.
    pub fn kron(&self, other: &CMat) -> CMat {
        let (a, b) = (self.n, other.n);
        let n = a * b;
        let mut out = CMat::zeros(n);
        for i in 0..a {
            for j in 0..a {
                let x = self[(i, j)];
                for k in 0..b {
                    for l in 0..b {
                        out[(i * b + k, j * b + l)] = x * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &CMat) -> CMat {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }
}

/// Eigenvalues (ascending) of a Hermitian matrix `A + iB`, via the real
/// symmetric embedding `[[A, −B], [B, A]]`, whose spectrum is that of the
/// Hermitian matrix with every eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let n = h.dim();
    let emb = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        // Symmetrize so tiny round-off in the input cannot skew the solve.
        let z = (h[(ii, jj)] + h[(jj, ii)].conj()) * 0.5;
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    });
    let eig = sym_eigen(&emb);
    eig.values
        .chunks(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &Mat, b: &Mat, tol: f64) {
        let diff = a.sub(b).max_abs();
        assert!(diff < tol, "diff {diff:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn jacobi_diagonalizes_symmetric() {
        let a = Mat::from_rows(&[[4.0, 1.0, -2.0], [1.0, 2.0, 0.5], [-2.0, 0.5, 3.0]]);
        let e = sym_eigen(&a);
        let rebuilt = e
            .vectors
            .matmul(&Mat::from_diag(&e.values))
            .matmul(&e.vectors.transpose());
        assert_close(&rebuilt, &a, 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let vtv = e.vectors.transpose().matmul(&e.vectors);
        assert_close(&vtv, &Mat::identity(3), 1e-12);
    }

    #[test]
    fn svd_reconstructs_and_orders() {
        let a = Mat::from_rows(&[[0.2, -0.7, 0.1], [0.9, 0.3, -0.4], [0.0, 0.5, 0.6]]);
        let d = svd(&a);
        assert_close(&d.reconstruct(), &a, 1e-13);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        assert_close(&d.u.transpose().matmul(&d.u), &Mat::identity(3), 1e-12);
        assert_close(&d.v.transpose().matmul(&d.v), &Mat::identity(3), 1e-12);
    }

    #[test]
    fn svd_of_rank_deficient_square_has_orthogonal_u() {
        let a = Mat::from_diag(&[0.5, 0.0, 0.0]);
        let d = svd(&a);
        assert_eq!(d.s, vec![0.5, 0.0, 0.0]);
        assert_close(&d.u.transpose().matmul(&d.u), &Mat::identity(3), 1e-12);
        assert_close(&d.reconstruct(), &a, 1e-14);
    }

    #[test]
    fn svd_wide_matrix() {
        let a = Mat::from_rows(&[[1.0, 2.0, 3.0, 4.0], [0.0, 1.0, -1.0, 2.0]]);
        let d = svd(&a);
        assert_close(&d.reconstruct(), &a, 1e-12);
    }

    #[test]
    fn pinv_of_tall_matrix_is_left_inverse() {
        let a = Mat::from_rows(&[[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]);
        let p = pinv(&a, 1e-12);
        assert_close(&p.matmul(&a), &Mat::identity(2), 1e-12);
    }

    #[test]
    fn inverse_round_trip_and_singular_error() {
        let a = Mat::from_rows(&[[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]]);
        let inv = inverse(&a).unwrap();
        assert_close(&a.matmul(&inv), &Mat::identity(3), 1e-12);
        let s = Mat::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(inverse(&s).is_err());
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_y() {
        let y = CMat::from_slice(
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let ev = hermitian_eigenvalues(&y);
        assert!((ev[0] + 1.0).abs() < 1e-13 && (ev[1] - 1.0).abs() < 1e-13);
    }
}
