use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition estimates above this are treated as singular.
pub const SINGULAR_COND: f64 = 1e14;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { Complex64::new(0.0, 0.0) })
    }

    /// Single-column matrix.
    pub fn column(values: &[Complex64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Multiply column `j` by `d[j]` (right multiplication by a diagonal).
    pub fn scale_cols(&self, d: &[Complex64]) -> Result<Self> {
        if d.len() != self.cols {
            return Err(Error::Dimension("diagonal length".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[j]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Partial-pivoted LU factorization `P·A = L·U`, packed in one matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &CMatrix, name: &str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("{name} is {}x{}, expected square", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::Singular {
                    matrix: name.to_string(),
                    cond: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= factor * v;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn order(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.order();
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                y[i] = y[i] - l * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                y[i] = y[i] - u * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    /// Solve `Aᴴ·x = b`.
    pub fn solve_adjoint_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.order();
        // Aᴴ = Uᴴ Lᴴ P, so solve Uᴴ z = b, Lᴴ v = z, x = Pᵀ v.
        let mut z = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let u = self.lu[(j, i)].conj();
                z[i] = z[i] - u * z[j];
            }
            z[i] /= self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let l = self.lu[(j, i)].conj();
                z[i] = z[i] - l * z[j];
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }

    /// Hager/Higham estimate of ‖A⁻¹‖₁.
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.order();
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve_vec(&x);
            est = y.iter().map(|v| v.norm()).sum::<f64>();
            let xi: Vec<Complex64> = y
                .iter()
                .map(|v| {
                    let r = v.norm();
                    if r == 0.0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        v / r
                    }
                })
                .collect();
            let z = self.solve_adjoint_vec(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![Complex64::new(0.0, 0.0); n];
            x[jmax] = Complex64::new(1.0, 0.0);
        }
        // Alternating-sign probe guards against the estimator's known blind spots.
        let probe: Vec<Complex64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        let alt = 2.0 * self.solve_vec(&probe).iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt)
    }
}

/// Result of [`solve`]: the solution and the 1-norm condition estimate of `A`.
#[derive(Clone, Debug)]
pub struct Solved {
    pub x: CMatrix,
    pub cond: f64,
}

/// Solve `A·X = B` by pivoted LU with one step of iterative refinement.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<Solved> {
    solve_named(a, b, "A")
}

pub(crate) fn solve_named(a: &CMatrix, b: &CMatrix, name: &str) -> Result<Solved> {
    if b.rows() != a.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, {name} has order {}",
            b.rows(),
            a.rows()
        )));
    }
    let lu = Lu::factor(a, name)?;
    let cond = a.norm1() * lu.inverse_norm1_estimate();
    if !(cond <= SINGULAR_COND) {
        return Err(Error::Singular {
            matrix: name.to_string(),
            cond,
        });
    }
    let mut x = CMatrix::zeros(a.cols(), b.cols());
    for j in 0..b.cols() {
        let bj = b.col(j);
        let mut xj = lu.solve_vec(&bj);
        let ax = a.matvec(&xj)?;
        let r: Vec<Complex64> = bj.iter().zip(&ax).map(|(u, v)| u - v).collect();
        let dx = lu.solve_vec(&r);
        for (v, d) in xj.iter_mut().zip(&dx) {
            *v += d;
        }
        for (i, v) in xj.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    if !x.is_finite() {
        return Err(Error::Singular {
            matrix: name.to_string(),
            cond,
        });
    }
    Ok(Solved { x, cond })
}

/// `(Q1ᴴQ1 + Q2ᴴQ2)⁻¹ Q2ᴴ w`, the regularized normal-equation solution.
pub fn normal_equation_pinv(q1: &CMatrix, q2: &CMatrix, w: &[Complex64]) -> Result<Vec<Complex64>> {
    if q1.cols() != q2.cols() {
        return Err(Error::Dimension(format!("Q1 has {} columns, Q2 has {}", q1.cols(), q2.cols())));
    }
    if w.len() != q2.rows() {
        return Err(Error::Dimension(format!("w has length {}, Q2 has {} rows", w.len(), q2.rows())));
    }
    let q1h = q1.adjoint();
    let q2h = q2.adjoint();
    let normal = q1h.matmul(q1)?.add(&q2h.matmul(q2)?)?;
    let rhs = CMatrix::column(&q2h.matvec(w)?);
    Ok(solve_named(&normal, &rhs, "normal matrix")?.x.col(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = CMatrix::from_fn(3, 2, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let s = solve(&CMatrix::identity(3), &b).unwrap();
        assert_eq!(s.x, b);
        assert!((s.cond - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_solve() {
        let a = CMatrix::diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let s = solve(&a, &CMatrix::identity(2)).unwrap();
        assert!((s.x[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((s.x[(1, 1)] - c(0.25, 0.0)).norm() < 1e-15);
        assert!(s.x[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_named() {
        let a = CMatrix::from_fn(2, 2, |_, _| c(1.0, 1.0));
        match solve_named(&a, &CMatrix::identity(2), "P_f") {
            Err(Error::Singular { matrix, .. }) => assert_eq!(matrix, "P_f"),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn near_singular_matrix_trips_condition_threshold() {
        let a = CMatrix::from_fn(2, 2, |i, j| if i == 1 && j == 1 { c(1.0 + 1e-16, 0.0) } else { c(1.0, 0.0) });
        assert!(matches!(solve(&a, &CMatrix::identity(2)), Err(Error::Singular { .. })));
    }

    #[test]
    fn condition_estimate_matches_exact_for_diagonal() {
        let a = CMatrix::diag(&[c(1.0, 0.0), c(0.0, 1e-3), c(5.0, 0.0)]);
        let s = solve(&a, &CMatrix::identity(3)).unwrap();
        assert!((s.cond - 5e3).abs() / 5e3 < 1e-12);
    }

    #[test]
    fn adjoint_solve_consistent() {
        let a = CMatrix::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 % 5.0 + 1.0, (i as f64 - j as f64) * 0.3));
        let lu = Lu::factor(&a, "A").unwrap();
        let b: Vec<Complex64> = (0..4).map(|i| c(i as f64, 1.0)).collect();
        let x = lu.solve_adjoint_vec(&b);
        let back = a.adjoint().matvec(&x).unwrap();
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn pinv_identity_cases() {
        let w: Vec<Complex64> = (0..3).map(|i| c(i as f64, -1.0)).collect();
        let z = CMatrix::zeros(3, 3);
        let id = CMatrix::identity(3);
        let b = normal_equation_pinv(&z, &id, &w).unwrap();
        for (u, v) in b.iter().zip(&w) {
            assert!((u - v).norm() < 1e-14);
        }
        let b = normal_equation_pinv(&id, &id, &w).unwrap();
        for (u, v) in b.iter().zip(&w) {
            assert!((u - v * 0.5).norm() < 1e-14);
        }
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            solve(&CMatrix::identity(2), &CMatrix::identity(3)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            normal_equation_pinv(&CMatrix::zeros(2, 2), &CMatrix::zeros(2, 3), &[c(0.0, 0.0); 2]),
            Err(Error::Dimension(_))
        ));
    }
}
