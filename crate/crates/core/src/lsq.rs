//! Small linear least-squares fits with parameter covariance.

use crate::error::{invalid, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LinearFit {
    pub coef: Vec<f64>,
    /// Row-major p×p covariance of `coef`.
    pub cov: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl LinearFit {
    pub fn std_error(&self, i: usize) -> f64 {
        let p = self.coef.len();
        self.cov[i * p + i].max(0.0).sqrt()
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.coef.len() + j]
    }
}

/// Fit y ≈ Σ_j coef_j·basis_j(x). With `sigma`, rows are weighted by 1/σ and
/// the covariance is scaled up by the reduced χ² when it exceeds one;
/// without, the covariance comes from the residual variance.
pub(crate) fn fit(xs: &[f64], ys: &[f64], sigma: Option<&[f64]>, basis: &[&dyn Fn(f64) -> f64]) -> Result<LinearFit> {
    let (n, p) = (xs.len(), basis.len());
    if ys.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return Err(invalid("least squares: mismatched input lengths"));
    }
    if n <= p {
        return Err(invalid(format!("least squares: {n} points for {p} parameters")));
    }
    let weight = |i: usize| match sigma {
        Some(s) if s[i] > 0.0 => 1.0 / s[i],
        _ => 1.0,
    };
    let mut a = DMatrix::from_fn(n, p, |i, j| basis[j](xs[i]) * weight(i));
    let b = DVector::from_fn(n, |i, _| ys[i] * weight(i));

    // Unit column norms keep R well conditioned for columns like 1, T, T².
    let scale: Vec<f64> = (0..p)
        .map(|j| {
            let norm = a.column(j).norm();
            if norm > 0.0 {
                norm
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }

    let qr = a.clone().qr();
    let r = qr.r();
    let qtb = qr.q().transpose() * &b;
    let scaled = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| invalid("least squares: singular design matrix"))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| invalid("least squares: singular design matrix"))?;
    let unit_cov = &r_inv * r_inv.transpose();

    let fitted = &a * &scaled;
    let residuals: Vec<f64> = (0..n).map(|i| (b[i] - fitted[i]) / weight(i)).collect();
    let chi2: f64 = (0..n).map(|i| (b[i] - fitted[i]).powi(2)).sum();
    let reduced = chi2 / (n - p) as f64;
    let factor = if sigma.is_some() { reduced.max(1.0) } else { reduced };

    let coef = (0..p).map(|j| scaled[j] / scale[j]).collect();
    let mut cov = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            cov[i * p + j] = unit_cov[(i, j)] * factor / (scale[i] * scale[j]);
        }
    }
    Ok(LinearFit { coef, cov, residuals })
}
