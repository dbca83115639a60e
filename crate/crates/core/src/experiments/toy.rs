//! Cosine-process toy problem: `X(t) = Σ_{k=0}^{5} ξ_k cos(kt)` on `[0, 2π]`
//! with `ξ_k ~ U[−1, 1]`, and the error curves of a λ sweep against `N`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{task_rng, TOY_HOLDOUT_STREAM, TOY_STREAM};
use crate::aggregation::{aggregate, aggregate_with_predictions, AggregatedModel};
use crate::error::{Error, Result};
use crate::funcdata::{gram, Dataset, FunctionalSample, Grid};
use crate::model_eval::{representer_l2_error, TruthPolynomial};
use crate::mp_solver::{fit_with_gram, LambdaVector, PolyModel, Representer};

pub const TOY_FREQUENCIES: usize = 6;

/// Data on which the aggregation system of the error curve is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyAggregation {
    /// The `N` training samples of each cell.
    Training,
    /// A separate draw of this many samples, independent of every training
    /// prefix and shared by all cells.
    HeldOut { samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub seed: u64,
    pub n_max: usize,
    pub lambda_grid: Vec<LambdaVector>,
    pub grid_nodes: usize,
    pub noise_sigma: f64,
    pub order: usize,
    pub aggregation: ToyAggregation,
}

impl Default for ToyConfig {
    fn default() -> Self {
        let candidates = vec![1e-5, 1e-7, 1e-9];
        Self {
            seed: 0,
            n_max: 40,
            lambda_grid: LambdaVector::grid(&vec![candidates; 3]).expect("static grid"),
            grid_nodes: 256,
            noise_sigma: 0.0,
            order: 2,
            aggregation: ToyAggregation::HeldOut { samples: 40 },
        }
    }
}

impl ToyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::EmptyDataset);
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidLambda("empty λ grid".into()));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| l.order() != self.order) {
            return Err(Error::OrderMismatch {
                expected: self.order,
                found: l.order(),
            });
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Parse(format!("noise sigma {} must be >= 0", self.noise_sigma)));
        }
        if self.grid_nodes < 2 {
            return Err(Error::TooFewNodes(self.grid_nodes));
        }
        if self.aggregation == (ToyAggregation::HeldOut { samples: 0 }) {
            return Err(Error::EmptyDataset);
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::uniform(0.0, 2.0 * PI, self.grid_nodes)
    }
}

/// `Σ_k ξ_k cos(k t)` tabulated on `grid`.
pub fn toy_predictor(id: i64, xi: &[f64; TOY_FREQUENCIES], grid: &Grid) -> FunctionalSample {
    FunctionalSample::from_fn(id, grid, |t| {
        xi.iter().enumerate().map(|(k, c)| c * (k as f64 * t).cos()).sum()
    })
    .expect("cosine sums are finite")
}

/// Toy dataset for explicit coefficient draws and additive noise.
pub fn toy_dataset_from_coefficients(
    grid: Arc<Grid>,
    truth: &TruthPolynomial,
    xis: &[[f64; TOY_FREQUENCIES]],
    noise: &[f64],
) -> Result<Dataset> {
    if noise.len() != xis.len() {
        return Err(Error::LengthMismatch {
            expected: xis.len(),
            found: noise.len(),
        });
    }
    let samples: Vec<FunctionalSample> = xis
        .iter()
        .enumerate()
        .map(|(i, xi)| toy_predictor(i as i64, xi, &grid))
        .collect();
    let responses = samples
        .iter()
        .zip(noise)
        .map(|(x, e)| Ok(truth.response(x, &grid)? + e))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(grid, samples, responses)
}

/// Coefficients and noise of toy sample `index`, a function of
/// `(seed, index)` alone.
pub fn toy_draw(seed: u64, index: usize, noise_sigma: f64) -> ([f64; TOY_FREQUENCIES], f64) {
    draw_from(task_rng(seed, TOY_STREAM, index as u64), noise_sigma)
}

fn draw_from(mut rng: rand_chacha::ChaCha8Rng, noise_sigma: f64) -> ([f64; TOY_FREQUENCIES], f64) {
    let mut xi = [0.0; TOY_FREQUENCIES];
    for v in xi.iter_mut() {
        *v = rng.random_range(-1.0..=1.0);
    }
    let noise = if noise_sigma > 0.0 {
        Normal::new(0.0, noise_sigma).expect("sigma validated").sample(&mut rng)
    } else {
        0.0
    };
    (xi, noise)
}

/// The first `n` toy samples for `config.seed`. Sample `i` is the same for
/// every `n > i`.
pub fn toy_sample(config: &ToyConfig, n: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let grid = Arc::new(config.grid()?);
    let truth = TruthPolynomial::toy(&grid);
    let (xis, noise): (Vec<_>, Vec<_>) = (0..n).map(|i| toy_draw(config.seed, i, config.noise_sigma)).unzip();
    toy_dataset_from_coefficients(grid, &truth, &xis, &noise)
}

/// `n` toy samples from a stream disjoint from [`toy_sample`]'s.
pub fn toy_holdout_sample(config: &ToyConfig, n: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let grid = Arc::new(config.grid()?);
    let truth = TruthPolynomial::toy(&grid);
    let (xis, noise): (Vec<_>, Vec<_>) = (0..n)
        .map(|i| draw_from(task_rng(config.seed, TOY_HOLDOUT_STREAM, i as u64), config.noise_sigma))
        .unzip();
    toy_dataset_from_coefficients(grid, &truth, &xis, &noise)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveModel {
    /// Index into the configured λ grid.
    Lambda(usize),
    Aggregate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurveRow {
    pub n: usize,
    pub model: CurveModel,
    /// NaN when the fit or aggregation for this cell failed.
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct ErrorCurve {
    pub lambda_grid: Vec<LambdaVector>,
    /// Ordered by `N`, then λ index, then the aggregate.
    pub rows: Vec<ErrorCurveRow>,
}

impl ErrorCurve {
    pub fn failed_cells(&self) -> usize {
        self.rows.iter().filter(|r| !r.error.is_finite()).count()
    }

    pub fn error_at(&self, n: usize, model: CurveModel) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n && r.model == model).map(|r| r.error)
    }

    /// Smallest single-model error at `n`.
    pub fn best_single(&self, n: usize) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.n == n && matches!(r.model, CurveModel::Lambda(_)) && r.error.is_finite())
            .map(|r| r.error)
            .reduce(f64::min)
    }
}

/// Model error of `rep` against a truth of possibly different order; missing
/// blocks on either side count as zero.
fn padded_error(
    rep: &Representer,
    training: &Dataset,
    truth: &TruthPolynomial,
    gram: &crate::funcdata::GramMatrix,
) -> Result<f64> {
    let order = rep.order().max(truth.order());
    let mut padded = Representer::zero(order, rep.n_samples());
    padded.intercept = rep.intercept;
    padded.coeffs.rows_mut(0, rep.order()).copy_from(&rep.coeffs);
    let truth = truth.padded(order);
    representer_l2_error(&padded, training, &truth, gram)
}

fn curve_cell(
    full: &Dataset,
    holdout: Option<&Dataset>,
    n: usize,
    lambda_grid: &[LambdaVector],
    truth: &TruthPolynomial,
) -> Vec<ErrorCurveRow> {
    let data = Arc::new(full.prefix(n).expect("n >= 1"));
    let g = gram(&data);
    let mut rows = Vec::with_capacity(lambda_grid.len() + 1);
    let mut fitted: Vec<PolyModel> = Vec::new();
    for (idx, lambda) in lambda_grid.iter().enumerate() {
        let error = match fit_with_gram(data.clone(), &g, lambda) {
            Ok(model) => {
                let e = padded_error(model.representer(), &data, truth, &g).unwrap_or(f64::NAN);
                fitted.push(model);
                e
            }
            Err(_) => f64::NAN,
        };
        rows.push(ErrorCurveRow {
            n,
            model: CurveModel::Lambda(idx),
            error,
        });
    }
    let agg = match holdout {
        Some(h) => aggregate(fitted, h),
        None => aggregate_on_training(fitted, &data, &g),
    };
    let agg_error = agg
        .ok()
        .and_then(|agg| agg.combined_representer())
        .and_then(|rep| padded_error(&rep, &data, truth, &g).ok())
        .unwrap_or(f64::NAN);
    rows.push(ErrorCurveRow {
        n,
        model: CurveModel::Aggregate,
        error: agg_error,
    });
    rows
}

/// Aggregates models that share `data` as training set, reading base
/// predictions off the Gram matrix.
pub fn aggregate_on_training(
    models: Vec<PolyModel>,
    data: &Dataset,
    g: &crate::funcdata::GramMatrix,
) -> Result<AggregatedModel> {
    if models.is_empty() {
        return Err(Error::EmptyModelList);
    }
    let mut p = nalgebra::DMatrix::zeros(models.len(), data.len());
    for (r, m) in models.iter().enumerate() {
        for (i, v) in m.representer().fitted_values(g).into_iter().enumerate() {
            p[(r, i)] = v;
        }
    }
    aggregate_with_predictions(models, &p, data.responses())
}

/// Error of every λ model and of their aggregate for `N = 1..=n_max`, using
/// nested prefixes of one draw. The aggregate is built on the data selected
/// by `config.aggregation`. Cells run in parallel on the current rayon
/// pool; the row order is fixed.
pub fn error_curve(config: &ToyConfig) -> Result<ErrorCurve> {
    config.validate()?;
    let full = toy_sample(config, config.n_max)?;
    let truth = TruthPolynomial::toy(full.grid());
    let holdout = match config.aggregation {
        ToyAggregation::Training => None,
        ToyAggregation::HeldOut { samples } => Some(toy_holdout_sample(config, samples)?),
    };
    let rows: Vec<ErrorCurveRow> = (1..=config.n_max)
        .into_par_iter()
        .map(|n| curve_cell(&full, holdout.as_ref(), n, &config.lambda_grid, &truth))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(ErrorCurve {
        lambda_grid: config.lambda_grid.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_predictor_response() {
        let grid = Arc::new(Grid::uniform(0.0, 2.0 * PI, 256).unwrap());
        let truth = TruthPolynomial::toy(&grid);
        let xi = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let ds = toy_dataset_from_coefficients(grid, &truth, &[xi], &[0.0]).unwrap();
        assert!(ds.samples()[0].values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!((ds.responses()[0] - (2.0 + 2.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn zero_predictor_response() {
        let grid = Arc::new(Grid::uniform(0.0, 2.0 * PI, 256).unwrap());
        let truth = TruthPolynomial::toy(&grid);
        let ds = toy_dataset_from_coefficients(grid, &truth, &[[0.0; 6]], &[0.0]).unwrap();
        assert_eq!(ds.responses()[0], 2.0);
    }

    #[test]
    fn sampling_is_deterministic_and_nested() {
        let cfg = ToyConfig {
            seed: 11,
            ..ToyConfig::default()
        };
        let a = toy_sample(&cfg, 6).unwrap();
        let b = toy_sample(&cfg, 6).unwrap();
        assert_eq!(a.responses(), b.responses());
        assert_eq!(a.samples(), b.samples());
        let short = toy_sample(&cfg, 3).unwrap();
        assert_eq!(short.responses(), &a.responses()[..3]);
        let other = toy_sample(&ToyConfig { seed: 12, ..cfg }, 3).unwrap();
        assert_ne!(other.responses(), short.responses());
    }

    #[test]
    fn coefficients_are_in_range() {
        for i in 0..50 {
            let (xi, e) = toy_draw(3, i, 0.0);
            assert!(xi.iter().all(|v| (-1.0..=1.0).contains(v)));
            assert_eq!(e, 0.0);
        }
    }

    #[test]
    fn noise_changes_responses_only() {
        let cfg = ToyConfig::default();
        let clean = toy_sample(&cfg, 5).unwrap();
        let noisy = toy_sample(
            &ToyConfig {
                noise_sigma: 0.5,
                ..cfg
            },
            5,
        )
        .unwrap();
        assert_eq!(clean.samples(), noisy.samples());
        assert_ne!(clean.responses(), noisy.responses());
    }

    #[test]
    fn config_validation() {
        assert!(ToyConfig::default().validate().is_ok());
        assert_eq!(ToyConfig::default().lambda_grid.len(), 27);
        let bad = ToyConfig {
            order: 1,
            ..ToyConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ToyConfig {
            noise_sigma: -1.0,
            ..ToyConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn small_curve_shape() {
        let cfg = ToyConfig {
            n_max: 3,
            grid_nodes: 64,
            ..ToyConfig::default()
        };
        let curve = error_curve(&cfg).unwrap();
        assert_eq!(curve.rows.len(), 3 * 28);
        assert!(curve.rows.iter().all(|r| r.error.is_finite()));
        assert_eq!(curve.rows[27].model, CurveModel::Aggregate);
        assert_eq!(curve.rows[28].n, 2);
    }

    #[test]
    fn holdout_is_independent_of_training_draw() {
        let cfg = ToyConfig::default();
        let train = toy_sample(&cfg, 5).unwrap();
        let held = toy_holdout_sample(&cfg, 5).unwrap();
        assert_ne!(train.responses(), held.responses());
        assert_eq!(held.responses(), toy_holdout_sample(&cfg, 5).unwrap().responses());
    }

    #[test]
    fn training_aggregation_variant_runs() {
        let cfg = ToyConfig {
            n_max: 3,
            grid_nodes: 64,
            aggregation: ToyAggregation::Training,
            ..ToyConfig::default()
        };
        let curve = error_curve(&cfg).unwrap();
        assert!(curve.rows.iter().all(|r| r.error.is_finite()));
    }

    #[test]
    fn linear_models_against_quadratic_truth() {
        let cfg = ToyConfig {
            n_max: 4,
            order: 1,
            grid_nodes: 64,
            lambda_grid: vec![LambdaVector::uniform(1, 1e-3).unwrap()],
            ..ToyConfig::default()
        };
        let curve = error_curve(&cfg).unwrap();
        assert!(curve.rows.iter().all(|r| r.error.is_finite()));
    }
}
