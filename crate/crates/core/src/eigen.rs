//! Dense symmetric eigenvalue routines.
//!
//! [`eigendecompose_symmetric`] is a cyclic Jacobi solver. [`eigenvalue_oracle`]
//! is an independent route: it locates the k-th eigenvalue by bisection on the
//! inertia of `M - tI`, counted from a Bunch-Kaufman symmetric factorization.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
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

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
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

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows.min(self.cols) {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Replaces the matrix by `(M + M^T) / 2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.rows {
            for j in 0..i {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    fn swap_symmetric(&mut self, p: usize, q: usize) {
        if p == q {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(p * self.cols + j, q * self.cols + j);
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + p, i * self.cols + q);
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues in ascending order; column `i` of `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// `max |M - Q diag(values) Q^T|`.
    pub fn reconstruction_error(&self, m: &Matrix) -> f64 {
        let n = self.values.len();
        let q = &self.vectors;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| q[(i, k)] * self.values[k] * q[(j, k)]).sum();
                worst = worst.max((m[(i, j)] - s).abs());
            }
        }
        worst
    }

    /// `max |Q^T Q - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let q = &self.vectors;
        let qtq = q.transpose().matmul(q);
        let n = self.values.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((qtq[(i, j)] - want).abs());
            }
        }
        worst
    }
}

const SYMMETRY_TOL: f64 = 1e-8;
const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

fn check_symmetric(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let asym = m.max_asymmetry();
    if asym > SYMMETRY_TOL * (1.0 + m.max_abs()) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Converges when the off-diagonal Frobenius mass drops below
/// `1e-12 * ||M||_F`; gives up after 100 sweeps.
pub fn eigendecompose_symmetric(m: &Matrix) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    let n = m.rows();
    let mut a = m.clone();
    a.symmetrize();
    let mut v = Matrix::identity(n);
    let target = JACOBI_REL_TOL * a.frobenius_norm();

    let off_mass = |a: &Matrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_mass(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_mass(&a) <= target;
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = idx.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        for k in 0..n {
            vectors[(k, col)] = v[(k, i)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Counts of negative, zero and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Inertia of `M - shift * I` from a Bunch-Kaufman `LDL^T` factorization.
pub fn shifted_inertia(m: &Matrix, shift: f64) -> Inertia {
    let n = m.rows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let alpha = (1.0 + 17f64.sqrt()) / 8.0;
    let mut inertia = Inertia {
        negative: 0,
        zero: 0,
        positive: 0,
    };
    let mut count = |d: f64| {
        if d < 0.0 {
            inertia.negative += 1;
        } else if d > 0.0 {
            inertia.positive += 1;
        } else {
            inertia.zero += 1;
        }
    };

    let mut k = 0;
    while k < n {
        let akk = a[(k, k)].abs();
        let (mut r, mut colmax) = (k, 0.0f64);
        for i in k + 1..n {
            if a[(i, k)].abs() > colmax {
                colmax = a[(i, k)].abs();
                r = i;
            }
        }
        if akk.max(colmax) == 0.0 {
            count(0.0);
            k += 1;
            continue;
        }
        let two_by_two = if akk >= alpha * colmax {
            false
        } else {
            let rowmax = (k..n)
                .filter(|&j| j != r)
                .map(|j| a[(r, j)].abs())
                .fold(0.0, f64::max);
            if akk * rowmax >= alpha * colmax * colmax {
                false
            } else if a[(r, r)].abs() >= alpha * rowmax {
                a.swap_symmetric(k, r);
                false
            } else {
                a.swap_symmetric(k + 1, r);
                true
            }
        };

        if !two_by_two {
            let d = a[(k, k)];
            count(d);
            for i in k + 1..n {
                let l = a[(i, k)] / d;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    a[(i, j)] -= l * a[(k, j)];
                }
            }
            k += 1;
        } else {
            let (e11, e21, e22) = (a[(k, k)], a[(k + 1, k)], a[(k + 1, k + 1)]);
            let det = e11 * e22 - e21 * e21;
            // Pivot selection guarantees det < 0: one eigenvalue of each sign.
            if det < 0.0 {
                count(-1.0);
                count(1.0);
            } else {
                let tr = e11 + e22;
                count(tr);
                count(if det == 0.0 { 0.0 } else { tr });
            }
            for i in k + 2..n {
                let (x1, x2) = (a[(i, k)], a[(i, k + 1)]);
                // Row i of L times E, i.e. [x1 x2] E^{-1}.
                let w1 = (x1 * e22 - x2 * e21) / det;
                let w2 = (x2 * e11 - x1 * e21) / det;
                for j in k + 2..n {
                    a[(i, j)] -= w1 * a[(k, j)] + w2 * a[(k + 1, j)];
                }
            }
            k += 2;
        }
    }
    inertia
}

/// Gershgorin interval containing every eigenvalue of a symmetric matrix.
pub fn gershgorin_bounds(m: &Matrix) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m.rows() {
        let radius: f64 = (0..m.cols())
            .filter(|&j| j != i)
            .map(|j| m[(i, j)].abs())
            .sum();
        lo = lo.min(m[(i, i)] - radius);
        hi = hi.max(m[(i, i)] + radius);
    }
    (lo, hi)
}

/// Absolute bisection tolerance of [`eigenvalue_oracle`].
pub const ORACLE_TOL: f64 = 1e-10;

/// The k-th smallest eigenvalue (1-based) of a symmetric matrix by inertia bisection.
pub fn eigenvalue_oracle(m: &Matrix, k: usize) -> Result<f64> {
    check_symmetric(m)?;
    let n = m.rows();
    if k == 0 || k > n {
        return Err(Error::InfeasibleK { k, lo: 1, hi: n });
    }
    let (glo, ghi) = gershgorin_bounds(m);
    let pad = 1e-3 * (1.0 + glo.abs().max(ghi.abs()));
    Ok(bisect_kth(glo - pad, ghi + pad, k, ORACLE_TOL, |t| {
        shifted_inertia(m, t).negative
    }))
}

/// Smallest `t` with `count_below(t) >= k`, assuming `count_below(lo) < k <= count_below(hi)`.
pub(crate) fn bisect_kth(
    mut lo: f64,
    mut hi: f64,
    k: usize,
    tol: f64,
    count_below: impl Fn(f64) -> usize,
) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let e = eigendecompose_symmetric(&Matrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(
            eigenvalue_oracle(&Matrix::identity(3), 1).unwrap().round(),
            1.0
        );
        assert!((eigenvalue_oracle(&Matrix::identity(3), 1).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_by_two_path_dtn() {
        let l = 4.0;
        let m = Matrix::from_rows(&[vec![1.0 / l, -1.0 / l], vec![-1.0 / l, 1.0 / l]]);
        let e = eigendecompose_symmetric(&m).unwrap();
        assert!(e.values[0].abs() < 1e-15);
        assert!((e.values[1] - 2.0 / l).abs() < 1e-15);
        assert!((eigenvalue_oracle(&m, 2).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn rank_one_update() {
        let n = 4;
        let mut m = Matrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] -= 0.25;
            }
        }
        let e = eigendecompose_symmetric(&m).unwrap();
        let want = [0.0, 1.0, 1.0, 1.0];
        for (v, w) in e.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-14);
        }
        assert!(e.reconstruction_error(&m) < 1e-14);
        assert!(e.orthonormality_error() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(
            eigendecompose_symmetric(&m),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(
            eigenvalue_oracle(&m, 1),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn inertia_of_zero_diagonal() {
        // [[0,1],[1,0]] has eigenvalues -1 and 1; needs a 2x2 pivot.
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let i = shifted_inertia(&m, 0.0);
        assert_eq!((i.negative, i.zero, i.positive), (1, 0, 1));
        let m = Matrix::zeros(3, 3);
        assert_eq!(shifted_inertia(&m, 0.0).zero, 3);
    }

    #[test]
    fn oracle_matches_jacobi_on_fixed_matrix() {
        let rows = vec![
            vec![4.0, 1.0, -2.0, 0.5, 0.0, 1.5],
            vec![1.0, -3.0, 0.0, 2.0, 1.0, 0.0],
            vec![-2.0, 0.0, 1.0, 0.0, -1.0, 2.0],
            vec![0.5, 2.0, 0.0, 0.0, 3.0, -1.0],
            vec![0.0, 1.0, -1.0, 3.0, 2.0, 0.25],
            vec![1.5, 0.0, 2.0, -1.0, 0.25, -1.0],
        ];
        let m = Matrix::from_rows(&rows);
        let e = eigendecompose_symmetric(&m).unwrap();
        for k in 1..=6 {
            let o = eigenvalue_oracle(&m, k).unwrap();
            assert!(
                (o - e.values[k - 1]).abs() < 1e-8,
                "k={k}: {o} vs {}",
                e.values[k - 1]
            );
        }
    }
}
