//! Least-squares aggregation of fitted models over their prediction vectors.
//!
//! With `P` the `R × N` matrix of base predictions on the aggregation data,
//! `G̃ = P Pᵀ / N` and `g̃ = P Y / N`; the aggregate is `ũ = Σ_r c̃_r u_r` with
//! `G̃ c̃ = g̃`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::funcdata::{Dataset, FunctionalSample};
use crate::mp_solver::{predict, predict_many, PolyModel, Representer};

/// `G̃` at or above this condition is solved with a ridge shift.
pub const RIDGE_CONDITION_LIMIT: f64 = 1e10;
/// Ridge shift relative to the mean diagonal of `G̃`.
pub const RIDGE_RELATIVE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct AggregatedModel {
    base_models: Vec<PolyModel>,
    coefficients: Vec<f64>,
    gram_tilde_condition: f64,
    ridge_used: f64,
}

impl AggregatedModel {
    pub fn from_parts(base_models: Vec<PolyModel>, coefficients: Vec<f64>) -> Result<Self> {
        if base_models.is_empty() {
            return Err(Error::EmptyModelList);
        }
        if base_models.len() != coefficients.len() {
            return Err(Error::LengthMismatch {
                expected: base_models.len(),
                found: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("aggregation coefficients"));
        }
        Ok(Self {
            base_models,
            coefficients,
            gram_tilde_condition: f64::NAN,
            ridge_used: 0.0,
        })
    }

    pub fn base_models(&self) -> &[PolyModel] {
        &self.base_models
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn gram_tilde_condition(&self) -> f64 {
        self.gram_tilde_condition
    }

    pub fn ridge_used(&self) -> f64 {
        self.ridge_used
    }

    /// `ũ` as a single representer, available when every base model was
    /// trained on the same data.
    pub fn combined_representer(&self) -> Option<Representer> {
        let first = self.base_models[0].training();
        let shared = self
            .base_models
            .iter()
            .all(|m| Arc::ptr_eq(m.training(), first) || shares_samples(m.training(), first));
        if !shared {
            return None;
        }
        Representer::linear_combination(&self.coefficients, self.base_models.iter().map(|m| m.representer())).ok()
    }
}

fn shares_samples(a: &Dataset, b: &Dataset) -> bool {
    a.grid() == b.grid() && a.samples() == b.samples()
}

/// Solution of `G̃ c̃ = g̃` with its diagnostics.
#[derive(Debug, Clone)]
pub struct AggregationSolve {
    pub coefficients: Vec<f64>,
    pub condition: f64,
    pub ridge_used: f64,
}

/// `G̃ = P Pᵀ / N`.
pub fn build_gram_tilde(base_predictions: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if base_predictions.nrows() == 0 {
        return Err(Error::EmptyModelList);
    }
    if base_predictions.ncols() == 0 {
        return Err(Error::EmptyDataset);
    }
    let n = base_predictions.ncols() as f64;
    let mut g = base_predictions * base_predictions.transpose() / n;
    // Mirror the upper triangle so symmetry is exact.
    for r in 0..g.nrows() {
        for s in 0..r {
            g[(r, s)] = g[(s, r)];
        }
    }
    Ok(g)
}

/// `g̃ = P Y / N`.
pub fn build_g_tilde(base_predictions: &DMatrix<f64>, responses: &[f64]) -> Result<DVector<f64>> {
    if base_predictions.ncols() != responses.len() {
        return Err(Error::LengthMismatch {
            expected: base_predictions.ncols(),
            found: responses.len(),
        });
    }
    if responses.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let y = DVector::from_column_slice(responses);
    Ok(base_predictions * y / responses.len() as f64)
}

/// Solves the aggregation normal equations for a prediction matrix.
pub fn solve_aggregation(base_predictions: &DMatrix<f64>, responses: &[f64]) -> Result<AggregationSolve> {
    let g = build_gram_tilde(base_predictions)?;
    let rhs = build_g_tilde(base_predictions, responses)?;
    if g.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("aggregation system"));
    }
    let r = g.nrows();
    let trace = g.trace();
    if trace <= 0.0 {
        return Err(Error::DegenerateAggregation);
    }
    let eig = g.clone().symmetric_eigenvalues();
    let max_eig = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_eig = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if min_eig > 0.0 {
        max_eig / min_eig
    } else {
        f64::INFINITY
    };

    let plain = if condition < RIDGE_CONDITION_LIMIT {
        g.clone().cholesky().map(|c| c.solve(&rhs))
    } else {
        None
    };
    let (x, ridge_used) = match plain {
        Some(x) => (x, 0.0),
        None => {
            let eps = RIDGE_RELATIVE * trace / r as f64;
            let shifted = &g + DMatrix::identity(r, r) * eps;
            let chol = shifted
                .cholesky()
                .ok_or_else(|| Error::SolverFailure("ridge-shifted G̃ is not positive definite".into()))?;
            (chol.solve(&rhs), eps)
        }
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("aggregation coefficients"));
    }
    Ok(AggregationSolve {
        coefficients: x.iter().copied().collect(),
        condition,
        ridge_used,
    })
}

/// `R × N` predictions of `models` on the inputs of `dataset`.
pub fn prediction_matrix(models: &[PolyModel], dataset: &Dataset) -> Result<DMatrix<f64>> {
    let mut p = DMatrix::zeros(models.len(), dataset.len());
    for (r, m) in models.iter().enumerate() {
        for (i, v) in predict_many(m, dataset.samples())?.into_iter().enumerate() {
            p[(r, i)] = v;
        }
    }
    Ok(p)
}

/// Aggregates `models` on `dataset`, usually their common training data.
pub fn aggregate(models: Vec<PolyModel>, dataset: &Dataset) -> Result<AggregatedModel> {
    if models.is_empty() {
        return Err(Error::EmptyModelList);
    }
    let p = prediction_matrix(&models, dataset)?;
    aggregate_with_predictions(models, &p, dataset.responses())
}

/// Like [`aggregate`] with the base predictions already computed.
pub fn aggregate_with_predictions(
    models: Vec<PolyModel>,
    base_predictions: &DMatrix<f64>,
    responses: &[f64],
) -> Result<AggregatedModel> {
    if models.is_empty() {
        return Err(Error::EmptyModelList);
    }
    if base_predictions.nrows() != models.len() {
        return Err(Error::LengthMismatch {
            expected: models.len(),
            found: base_predictions.nrows(),
        });
    }
    let sol = solve_aggregation(base_predictions, responses)?;
    Ok(AggregatedModel {
        base_models: models,
        coefficients: sol.coefficients,
        gram_tilde_condition: sol.condition,
        ridge_used: sol.ridge_used,
    })
}

/// `Σ_r c̃_r · predict(u_r, x)`.
pub fn predict_aggregated(agg: &AggregatedModel, x_new: &FunctionalSample) -> Result<f64> {
    let mut acc = 0.0;
    for (m, c) in agg.base_models.iter().zip(&agg.coefficients) {
        acc += c * predict(m, x_new)?;
    }
    Ok(acc)
}

pub fn predict_aggregated_many(agg: &AggregatedModel, xs: &[FunctionalSample]) -> Result<Vec<f64>> {
    xs.iter().map(|x| predict_aggregated(agg, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdata::Grid;
    use crate::mp_solver::{fit, LambdaVector};
    use std::f64::consts::PI;

    #[test]
    fn gram_tilde_examples() {
        let ones = DMatrix::from_element(1, 5, 1.0);
        assert_eq!(build_gram_tilde(&ones).unwrap()[(0, 0)], 1.0);

        let orth = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let g = build_gram_tilde(&orth).unwrap();
        assert_eq!(g[(0, 1)], 0.0);

        let dup = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let g = build_gram_tilde(&dup).unwrap();
        assert!(g.determinant().abs() < 1e-12);

        assert!(matches!(
            build_gram_tilde(&DMatrix::zeros(0, 3)),
            Err(Error::EmptyModelList)
        ));
    }

    #[test]
    fn g_tilde_examples() {
        let p = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert_eq!(build_g_tilde(&p, &[0.0, 0.0]).unwrap()[0], 0.0);
        assert_eq!(build_g_tilde(&p, &[1.0, -1.0]).unwrap()[0], 0.0);
        let y = [1.0, 2.0, 3.0];
        let p = DMatrix::from_row_slice(1, 3, &y);
        assert!((build_g_tilde(&p, &y).unwrap()[0] - 14.0 / 3.0).abs() < 1e-15);
        assert!(build_g_tilde(&p, &[1.0]).is_err());
    }

    #[test]
    fn single_model_is_scalar_least_squares() {
        let p = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, -1.0]);
        let y = [0.5, 3.0, 1.0];
        let sol = solve_aggregation(&p, &y).unwrap();
        let expect = (0.5 + 6.0 - 1.0) / (1.0 + 4.0 + 1.0);
        assert!((sol.coefficients[0] - expect).abs() < 1e-14);
        assert_eq!(sol.ridge_used, 0.0);
    }

    #[test]
    fn duplicate_model_takes_ridge_path() {
        let row = [1.0, 2.0, -1.0, 0.3];
        let y = [0.5, 3.0, 1.0, -0.2];
        let single = solve_aggregation(&DMatrix::from_row_slice(1, 4, &row), &y).unwrap();
        let both: Vec<f64> = row.iter().chain(&row).copied().collect();
        let dup = solve_aggregation(&DMatrix::from_row_slice(2, 4, &both), &y).unwrap();
        assert!(dup.ridge_used > 0.0);
        for v in row {
            let a = single.coefficients[0] * v;
            let b = (dup.coefficients[0] + dup.coefficients[1]) * v;
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_predictions_are_degenerate() {
        let p = DMatrix::zeros(2, 3);
        assert!(matches!(
            solve_aggregation(&p, &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateAggregation)
        ));
    }

    fn small_models() -> (Vec<PolyModel>, Arc<Dataset>) {
        let grid = Arc::new(Grid::uniform(0.0, 2.0 * PI, 64).unwrap());
        let samples: Vec<_> = (0..4)
            .map(|k| FunctionalSample::from_fn(k, &grid, |t| 1.0 + (k as f64 * t).cos()).unwrap())
            .collect();
        let ds = Arc::new(Dataset::new(grid, samples, vec![1.0, 0.0, 2.0, -1.0]).unwrap());
        let models = [0.1, 1.0]
            .iter()
            .map(|&l| fit(ds.clone(), &LambdaVector::uniform(1, l).unwrap()).unwrap())
            .collect();
        (models, ds)
    }

    #[test]
    fn predict_aggregated_examples() {
        let (models, ds) = small_models();
        let x = &ds.samples()[2];
        let base = predict(&models[0], x).unwrap();

        let zero = AggregatedModel::from_parts(models.clone(), vec![0.0, 0.0]).unwrap();
        assert_eq!(predict_aggregated(&zero, x).unwrap(), 0.0);

        let ident = AggregatedModel::from_parts(vec![models[0].clone()], vec![1.0]).unwrap();
        assert_eq!(predict_aggregated(&ident, x).unwrap(), base);

        let half = AggregatedModel::from_parts(vec![models[0].clone(), models[0].clone()], vec![0.5, 0.5]).unwrap();
        assert!((predict_aggregated(&half, x).unwrap() - base).abs() < 1e-14);
    }

    #[test]
    fn combined_representer_matches_weighted_predictions() {
        let (models, ds) = small_models();
        let agg = aggregate(models, &ds).unwrap();
        let rep = agg.combined_representer().unwrap();
        for x in ds.samples() {
            let inner = crate::funcdata::cross_inner(&ds, x).unwrap();
            let a = rep.evaluate(&inner);
            let b = predict_aggregated(&agg, x).unwrap();
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn empty_model_list() {
        let (_, ds) = small_models();
        assert!(matches!(aggregate(vec![], &ds), Err(Error::EmptyModelList)));
    }
}
