//! Tikhonov-regularised least squares,
//! argmin_a ‖Aa − b‖² + τ²‖Da‖² with diagonal D.
//!
//! The problem is solved as the ordinary least-squares problem for the
//! stacked matrix [A; τD] with a Householder QR factorisation. Forming the
//! normal equations would square the condition number of A.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sliceop::Norm;

/// A regularised least-squares problem.
#[derive(Debug, Clone)]
pub struct RidgeProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    tau: f64,
    diag: Vec<f64>,
}

/// Minimiser of a [`RidgeProblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSolution {
    pub coefficients: Vec<f64>,
    /// Set when τ = 0 and A is numerically rank deficient; the coefficients
    /// are then the minimum-norm least-squares solution.
    pub degenerate: bool,
}

impl RidgeProblem {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, tau: f64, diag: Vec<f64>) -> Result<Self> {
        let (rows, cols) = a.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::argument("design matrix must be non-empty"));
        }
        if b.len() != rows {
            return Err(Error::argument(format!("right-hand side has {} entries, expected {rows}", b.len())));
        }
        if diag.len() != cols {
            return Err(Error::argument(format!("regulariser has {} entries, expected {cols}", diag.len())));
        }
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::argument(format!("tau must be finite and non-negative, got {tau}")));
        }
        if let Some(k) = diag.iter().position(|&v| !(v >= 1.0) || !v.is_finite()) {
            return Err(Error::argument(format!("regulariser entry {k} must be >= 1, got {}", diag[k])));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("design matrix has non-finite entries"));
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("right-hand side entry {i} is not finite")));
        }
        Ok(RidgeProblem { a, b: DVector::from_vec(b), tau, diag })
    }

    /// Regulariser diagonal taken from a norm on the cosine basis.
    pub fn with_norm(a: DMatrix<f64>, b: Vec<f64>, tau: f64, norm: Norm) -> Result<Self> {
        let diag = (0..a.ncols()).map(|k| norm.weight(k)).collect();
        Self::new(a, b, tau, diag)
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn regulariser(&self) -> &[f64] {
        &self.diag
    }

    /// ‖Aa − b‖² + τ²‖Da‖².
    pub fn objective(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        let r = &self.a * &x - &self.b;
        let reg: f64 = x.iter().zip(&self.diag).map(|(xi, di)| (di * xi).powi(2)).sum();
        r.norm_squared() + self.tau * self.tau * reg
    }
}

/// Solve the problem; see the module docs for the method.
pub fn solve_ridge(p: &RidgeProblem) -> Result<RidgeSolution> {
    let (rows, cols) = p.a.shape();
    let (m, rhs) = if p.tau > 0.0 {
        let mut m = DMatrix::zeros(rows + cols, cols);
        m.view_mut((0, 0), (rows, cols)).copy_from(&p.a);
        for (k, dk) in p.diag.iter().enumerate() {
            m[(rows + k, k)] = p.tau * dk;
        }
        let mut rhs = DVector::zeros(rows + cols);
        rhs.rows_mut(0, rows).copy_from(&p.b);
        (m, rhs)
    } else {
        (p.a.clone(), p.b.clone())
    };

    if m.nrows() >= cols {
        let qr = m.clone().qr();
        let r = qr.r();
        let rmax = r.diagonal().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let rmin = r.diagonal().iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
        let tol = f64::EPSILON * rmax * (m.nrows().max(cols) as f64);
        if rmin > tol {
            let mut qtb = rhs.clone();
            qr.q_tr_mul(&mut qtb);
            let head = qtb.rows(0, cols).into_owned();
            let x =
                r.solve_upper_triangular(&head).ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
            return Ok(RidgeSolution { coefficients: x.as_slice().to_vec(), degenerate: false });
        }
    }
    if p.tau > 0.0 {
        // [A; τD] always has full column rank when τ > 0 and D ≥ 1.
        return Err(Error::Numerical("regularised system is numerically singular".into()));
    }
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = f64::EPSILON * smax * (rows.max(cols) as f64);
    let x = svd.solve(&rhs, eps).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(RidgeSolution { coefficients: x.as_slice().to_vec(), degenerate: true })
}
