//! Dense solves with a condition check and a minimum-norm fallback.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this 1-norm condition estimate the LU result is discarded in favour
/// of the SVD minimum-norm least-squares solution.
pub const DIRECT_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Lu,
    MinNormLeastSquares,
}

#[derive(Debug, Clone)]
pub struct DenseSolve {
    pub x: DVector<f64>,
    /// `‖A‖₁ ‖A⁻¹‖₁`, infinite when the LU factorization is singular.
    pub condition: f64,
    pub method: SolveMethod,
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `A x = b` by LU with partial pivoting, falling back to the SVD
/// pseudo-inverse when `A` is singular or its condition reaches
/// [`DIRECT_CONDITION_LIMIT`].
pub fn solve_dense(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DenseSolve> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::SolverFailure(format!(
            "shape {}x{} against rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::SolverFailure("non-finite system entries".into()));
    }
    let lu = a.clone().lu();
    let condition = lu
        .try_inverse()
        .map(|inv| one_norm(a) * one_norm(&inv))
        .filter(|c| c.is_finite())
        .unwrap_or(f64::INFINITY);
    if condition < DIRECT_CONDITION_LIMIT {
        if let Some(x) = lu.solve(b) {
            if x.iter().all(|v| v.is_finite()) {
                return Ok(DenseSolve {
                    x,
                    condition,
                    method: SolveMethod::Lu,
                });
            }
        }
    }
    let x = min_norm_least_squares(a, b)?;
    Ok(DenseSolve {
        x,
        condition,
        method: SolveMethod::MinNormLeastSquares,
    })
}

/// Minimum-norm least-squares solution via SVD, truncating singular values
/// below `σ_max · max(m, n) · ε`.
pub fn min_norm_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = sigma_max * a.nrows().max(a.ncols()) as f64 * f64::EPSILON;
    let x = svd.solve(b, cutoff).map_err(|e| Error::SolverFailure(e.to_string()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverFailure("non-finite least-squares solution".into()));
    }
    Ok(x)
}

pub fn residual_norm(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a * x - b).norm()
}
