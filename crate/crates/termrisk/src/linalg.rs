//! Small dense linear algebra: a row-major matrix, a cyclic Jacobi
//! eigensolver for symmetric matrices, and Householder-QR based solvers
//! for the constraint systems built elsewhere in the crate.
//!
//! Everything here is plain `f64`, single-threaded, and deterministic;
//! the matrices in this problem domain stay small (tens of rows), so
//! clarity and reproducibility win over blocked performance tricks.

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Borrow row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copy column `j` out as a vector.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Clone the contents into nested rows.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
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

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "inner dimensions must agree");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest absolute asymmetry `max |A_ij - A_ji|`; zero for non-square.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        if self.rows == self.cols {
            for i in 0..self.rows {
                for j in (i + 1)..self.cols {
                    worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
                }
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Maximum number of cyclic Jacobi sweeps before giving up.
const MAX_JACOBI_SWEEPS: usize = 64;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps over all off-diagonal pairs, annihilating each in turn, until the
/// off-diagonal Frobenius norm drops below `1e-12 * ||S||_F`. Returns the
/// eigenvalues and the matrix whose columns are the matching eigenvectors,
/// in the order the rotations left them (unsorted).
///
/// The caller is responsible for checking symmetry; the lower triangle is
/// mirrored from the upper before iterating.
pub fn jacobi_eigh(s: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = s.rows();
    assert_eq!(n, s.cols(), "matrix must be square");

    let mut a = s.clone();
    // Work on an exactly symmetric copy.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }

    let mut v = Matrix::identity(n);
    let norm = a.frobenius_norm();
    let threshold = 1e-12 * norm;

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            let eig = (0..n).map(|i| a[(i, i)]).collect();
            return Ok((eig, v));
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    if off_diagonal_norm(&a) <= threshold {
        let eig = (0..n).map(|i| a[(i, i)]).collect();
        return Ok((eig, v));
    }
    Err(Error::JacobiNoConvergence {
        sweeps: MAX_JACOBI_SWEEPS,
    })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation annihilating `a[(p, q)]`, accumulated into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let tau = (aqq - app) / (2.0 * apq);
    // Smaller-angle root of t^2 + 2*tau*t - 1 = 0.
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Relative diagonal tolerance below which R is treated as rank-deficient.
const RANK_TOL: f64 = 1e-12;

/// Householder QR factorization. Returns the packed factor matrix (R in the
/// upper triangle, reflector tails below the diagonal) and the reflector
/// scaling coefficients.
fn householder_factor(a: &Matrix) -> (Matrix, Vec<f64>) {
    let m = a.rows();
    let n = a.cols();
    let mut r = a.clone();
    let mut betas = vec![0.0; n.min(m)];

    for k in 0..n.min(m) {
        let mut norm = 0.0;
        for i in k..m {
            norm += r[(i, k)] * r[(i, k)];
        }
        norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] >= 0.0 { -norm } else { norm };
        let mut v0 = r[(k, k)] - alpha;
        let mut vnorm2 = v0 * v0;
        for i in (k + 1)..m {
            vnorm2 += r[(i, k)] * r[(i, k)];
        }
        if vnorm2 == 0.0 {
            continue;
        }
        // Normalize so the reflector head is 1; store the tail in place.
        for i in (k + 1)..m {
            r[(i, k)] /= v0;
        }
        let beta = 2.0 * v0 * v0 / vnorm2;
        v0 = 1.0;
        betas[k] = beta;

        for j in (k + 1)..n {
            let mut dot = v0 * r[(k, j)];
            for i in (k + 1)..m {
                dot += r[(i, k)] * r[(i, j)];
            }
            dot *= beta;
            r[(k, j)] -= dot;
            for i in (k + 1)..m {
                r[(i, j)] -= dot * r[(i, k)];
            }
        }
        r[(k, k)] = alpha;
    }
    (r, betas)
}

/// Apply the transposed Q of a packed Householder factorization to `b`.
fn apply_qt(packed: &Matrix, betas: &[f64], b: &mut [f64]) {
    let m = packed.rows();
    let n = packed.cols();
    for k in 0..n.min(m) {
        if betas[k] == 0.0 {
            continue;
        }
        let mut dot = b[k];
        for i in (k + 1)..m {
            dot += packed[(i, k)] * b[i];
        }
        dot *= betas[k];
        b[k] -= dot;
        for i in (k + 1)..m {
            b[i] -= dot * packed[(i, k)];
        }
    }
}

/// Apply Q of a packed Householder factorization to `b`.
fn apply_q(packed: &Matrix, betas: &[f64], b: &mut [f64]) {
    let m = packed.rows();
    let n = packed.cols();
    for k in (0..n.min(m)).rev() {
        if betas[k] == 0.0 {
            continue;
        }
        let mut dot = b[k];
        for i in (k + 1)..m {
            dot += packed[(i, k)] * b[i];
        }
        dot *= betas[k];
        b[k] -= dot;
        for i in (k + 1)..m {
            b[i] -= dot * packed[(i, k)];
        }
    }
}

/// Least-squares solve of `A x = b` for a square or tall `A` via
/// Householder QR. Returns `None` when R is numerically rank-deficient.
pub fn qr_solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let m = a.rows();
    let n = a.cols();
    assert!(m >= n, "qr_solve needs rows >= cols");
    assert_eq!(m, b.len());

    let (packed, betas) = householder_factor(a);
    let scale = a.frobenius_norm().max(1.0);
    for k in 0..n {
        if packed[(k, k)].abs() <= RANK_TOL * scale {
            return None;
        }
    }
    let mut y = b.to_vec();
    apply_qt(&packed, &betas, &mut y);
    // Back substitution on R x = y[..n].
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in (i + 1)..n {
            acc -= packed[(i, j)] * x[j];
        }
        x[i] = acc / packed[(i, i)];
    }
    Some(x)
}

/// Minimum-norm solution of the underdetermined system `A x = b`
/// (`A` wide, full row rank) via QR of `A^T`: with `A^T = QR`,
/// `x = Q R^{-T} b`. Returns `None` when `A` is row-rank-deficient.
pub fn min_norm_solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let m = a.rows();
    let n = a.cols();
    assert!(n >= m, "min_norm_solve needs cols >= rows");
    assert_eq!(m, b.len());

    let at = a.transpose();
    let (packed, betas) = householder_factor(&at);
    let scale = a.frobenius_norm().max(1.0);
    for k in 0..m {
        if packed[(k, k)].abs() <= RANK_TOL * scale {
            return None;
        }
    }
    // Forward substitution on R^T z = b.
    let mut z = vec![0.0; m];
    for i in 0..m {
        let mut acc = b[i];
        for j in 0..i {
            acc -= packed[(j, i)] * z[j];
        }
        z[i] = acc / packed[(i, i)];
    }
    // x = Q * [z; 0].
    let mut x = vec![0.0; n];
    x[..m].copy_from_slice(&z);
    apply_q(&packed, &betas, &mut x);
    Some(x)
}

/// Minimum-norm least-squares solve for any `A`, via the eigendecomposition
/// of the Gram matrix: `x = A^T (A A^T)^+ b`. Rank is truncated at
/// `1e-12` relative to the largest Gram eigenvalue. Used as the fallback
/// when QR detects rank deficiency.
pub fn pinv_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let m = a.rows();
    assert_eq!(m, b.len());

    let gram = a.mul(&a.transpose());
    let (eig, vecs) = jacobi_eigh(&gram)?;
    let max_eig = eig.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = RANK_TOL * max_eig.max(f64::MIN_POSITIVE);

    // y = V diag(1/eig) V^T b over the retained spectrum.
    let mut y = vec![0.0; m];
    for (v, &lambda) in eig.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let mut dot = 0.0;
        for i in 0..m {
            dot += vecs[(i, v)] * b[i];
        }
        dot /= lambda;
        for i in 0..m {
            y[i] += vecs[(i, v)] * dot;
        }
    }
    Ok(a.transpose().mul_vec(&y))
}

/// `max_i |A x - b|_i`: the residual norm used for feasibility checks.
pub fn residual_inf_norm(a: &Matrix, x: &[f64], b: &[f64]) -> f64 {
    a.mul_vec(x)
        .iter()
        .zip(b)
        .map(|(ax, bi)| (ax - bi).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn matmul_and_transpose_agree_with_hand_product() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![7.0, 8.0], vec![9.0, 10.0]]).unwrap();
        let c = a.mul(&b);
        assert_eq!(c.to_rows(), vec![vec![25.0, 28.0], vec![57.0, 64.0], vec![89.0, 100.0]]);
        assert_eq!(a.transpose().to_rows(), vec![vec![1.0, 3.0, 5.0], vec![2.0, 4.0, 6.0]]);
    }

    #[test]
    fn jacobi_identity_spectrum() {
        let (eig, vecs) = jacobi_eigh(&Matrix::identity(3)).unwrap();
        for &e in &eig {
            assert_close(e, 1.0, 1e-14);
        }
        assert_eq!(vecs, Matrix::identity(3));
    }

    #[test]
    fn jacobi_reproduces_two_by_two_characteristic_roots() {
        // Oracle: eigenvalues of [[2,1],[1,2]] from the characteristic
        // polynomial are 3 and 1, with eigenvectors (1,1)/√2 and (1,-1)/√2.
        let s = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (mut eig, vecs) = jacobi_eigh(&s).unwrap();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_close(eig[0], 3.0, 1e-12);
        assert_close(eig[1], 1.0, 1e-12);
        // Columns stay orthonormal.
        let vtv = vecs.transpose().mul(&vecs);
        for i in 0..2 {
            for j in 0..2 {
                assert_close(vtv[(i, j)], if i == j { 1.0 } else { 0.0 }, 1e-12);
            }
        }
    }

    #[test]
    fn qr_solve_recovers_exact_solution() {
        let a = Matrix::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ])
        .unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let x = qr_solve(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(x_true) {
            assert_close(*xi, ti, 1e-12);
        }
    }

    #[test]
    fn qr_solve_flags_singular_matrix() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(qr_solve(&a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn min_norm_matches_normal_equation_route() {
        // A is 1x2: solutions of x + y = 2 form a line; the minimum-norm
        // point is (1, 1).
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let x = min_norm_solve(&a, &[2.0]).unwrap();
        assert_close(x[0], 1.0, 1e-14);
        assert_close(x[1], 1.0, 1e-14);
    }

    #[test]
    fn pinv_solve_handles_duplicate_rows() {
        // Two copies of the same consistent constraint.
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let x = pinv_solve(&a, &[2.0, 2.0]).unwrap();
        assert_close(x[0], 1.0, 1e-10);
        assert_close(x[1], 1.0, 1e-10);
        assert!(residual_inf_norm(&a, &x, &[2.0, 2.0]) < 1e-10);
    }
}
