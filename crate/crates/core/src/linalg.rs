//! Dense complex matrices of small dimension.
//!
//! Everything here operates on matrices of side at most a few dozen entries
//! (local dimensions, Gram matrices over a state's support), so simple
//! row-major storage and Jacobi iteration are entirely adequate.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::Numeric("ragged or empty matrix".into()));
        }
        Ok(CMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
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

    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: C64) -> CMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= factor;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Determinant via LU decomposition with partial pivoting.
    pub fn det(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::Numeric("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        let mut lu = self.clone();
        let mut det = C64::new(1.0, 0.0);
        for k in 0..n {
            let (pivot_row, pivot_norm) = (k..n)
                .map(|r| (r, lu[(r, k)].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if pivot_norm == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            if pivot_row != k {
                for j in 0..n {
                    let (a, b) = (lu[(k, j)], lu[(pivot_row, j)]);
                    lu[(k, j)] = b;
                    lu[(pivot_row, j)] = a;
                }
                det = -det;
            }
            let pivot = lu[(k, k)];
            det *= pivot;
            for r in k + 1..n {
                let factor = lu[(r, k)] / pivot;
                for j in k..n {
                    let sub = factor * lu[(k, j)];
                    lu[(r, j)] -= sub;
                }
            }
        }
        Ok(det)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in ascending order and the matching unitary whose
    /// columns are eigenvectors, so `self = V diag(w) V^dagger`.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, CMatrix)> {
        if !self.is_square() {
            return Err(Error::Numeric(
                "eigendecomposition of non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut h = self.clone();
        let mut v = CMatrix::identity(n);
        let scale = 1.0 + h.frobenius_norm();
        let tol = 1e-14 * scale;

        for _sweep in 0..120 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    off += h[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= tol {
                let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (h[(i, i)].re, i)).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                let mut vectors = CMatrix::zeros(n, n);
                for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
                    for r in 0..n {
                        vectors[(r, new_col)] = v[(r, old_col)];
                    }
                }
                return Ok((values, vectors));
            }
            for p in 0..n {
                for q in p + 1..n {
                    let z = h[(p, q)];
                    let r = z.norm();
                    if r <= 1e-300 {
                        continue;
                    }
                    let phase = z / r;
                    let a = h[(p, p)].re;
                    let b = h[(q, q)].re;
                    let tau = (b - a) / (2.0 * r);
                    // Smaller root of t^2 - 2 tau t - 1 = 0.
                    let t = if tau == 0.0 {
                        1.0
                    } else {
                        -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let sp = phase * s; // s e^{i phi}
                    let spc = phase.conj() * s; // s e^{-i phi}

                    // Column update: M <- M G.
                    for k in 0..n {
                        let (mp, mq) = (h[(k, p)], h[(k, q)]);
                        h[(k, p)] = mp * c + mq * spc;
                        h[(k, q)] = -mp * sp + mq * c;
                    }
                    // Row update: M <- G^dagger M.
                    for k in 0..n {
                        let (mp, mq) = (h[(p, k)], h[(q, k)]);
                        h[(p, k)] = mp * c + mq * sp;
                        h[(q, k)] = -mp * spc + mq * c;
                    }
                    // Accumulate eigenvectors: V <- V G.
                    for k in 0..n {
                        let (vp, vq) = (v[(k, p)], v[(k, q)]);
                        v[(k, p)] = vp * c + vq * spc;
                        v[(k, q)] = -vp * sp + vq * c;
                    }
                    // Clean the eliminated pair against rounding drift.
                    h[(p, q)] = C64::new(0.0, 0.0);
                    h[(q, p)] = C64::new(0.0, 0.0);
                    let hpp = h[(p, p)].re;
                    let hqq = h[(q, q)].re;
                    h[(p, p)] = C64::new(hpp, 0.0);
                    h[(q, q)] = C64::new(hqq, 0.0);
                }
            }
        }
        Err(Error::Numeric("Jacobi iteration did not converge".into()))
    }

    /// `f(self)` for Hermitian positive semidefinite input, applied on the
    /// spectrum: `V diag(f(w)) V^dagger`.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
        let (values, vectors) = self.hermitian_eigen()?;
        let mapped = CMatrix::diagonal(
            &values
                .iter()
                .map(|&w| C64::new(f(w), 0.0))
                .collect::<Vec<_>>(),
        );
        vectors.mul(&mapped)?.mul(&vectors.adjoint())
    }

    /// Singular values in descending order, by one-sided Jacobi
    /// orthogonalization of the columns. Unlike the Gram-matrix route this
    /// resolves small singular values to full relative precision.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let mut a = if self.cols > self.rows {
            self.adjoint()
        } else {
            self.clone()
        };
        let n = a.cols;
        for _sweep in 0..120 {
            let mut rotated = false;
            let norms2: Vec<f64> = (0..n)
                .map(|j| (0..a.rows).map(|k| a[(k, j)].norm_sqr()).sum())
                .collect();
            let max2 = norms2.iter().fold(0.0f64, |m, &v| m.max(v));
            for p in 0..n {
                for q in p + 1..n {
                    let mut app = 0.0;
                    let mut aqq = 0.0;
                    let mut apq = C64::new(0.0, 0.0);
                    for k in 0..a.rows {
                        let (xp, xq) = (a[(k, p)], a[(k, q)]);
                        app += xp.norm_sqr();
                        aqq += xq.norm_sqr();
                        apq += xp.conj() * xq;
                    }
                    // Columns at rounding level against the dominant one
                    // contribute nothing beyond noise; rotating them against
                    // each other would never settle.
                    if app <= 1e-30 * max2 || aqq <= 1e-30 * max2 {
                        continue;
                    }
                    let r = apq.norm();
                    let denom = (app * aqq).sqrt();
                    if r <= 1e-14 * denom {
                        continue;
                    }
                    rotated = true;
                    let phase = apq / r;
                    let tau = (aqq - app) / (2.0 * r);
                    let t = if tau == 0.0 {
                        1.0
                    } else {
                        -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let sp = phase * s;
                    let spc = phase.conj() * s;
                    for k in 0..a.rows {
                        let (xp, xq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = xp * c + xq * spc;
                        a[(k, q)] = -xp * sp + xq * c;
                    }
                }
            }
            if !rotated {
                let mut sigma: Vec<f64> = (0..n)
                    .map(|j| {
                        (0..a.rows)
                            .map(|k| a[(k, j)].norm_sqr())
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect();
                sigma.sort_by(|x, y| y.total_cmp(x));
                return Ok(sigma);
            }
        }
        Err(Error::Numeric("one-sided Jacobi did not converge".into()))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        let c = self.cols;
        &mut self.data[i * c + j]
    }
}
