//! Functions tabulated on a quadrature grid, their L² inner products and
//! Gram matrices, and resampling of raw diameter profiles onto a grid.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights of a quadrature rule on `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lower: f64,
    upper: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Uniform nodes with composite-trapezoid weights.
    pub fn uniform(lower: f64, upper: f64, n_nodes: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(Error::InvalidInterval { lower, upper });
        }
        if n_nodes < 2 {
            return Err(Error::TooFewNodes(n_nodes));
        }
        let intervals = (n_nodes - 1) as f64;
        let h = (upper - lower) / intervals;
        let nodes = (0..n_nodes)
            .map(|k| {
                if k == n_nodes - 1 {
                    upper
                } else {
                    lower + (upper - lower) * (k as f64 / intervals)
                }
            })
            .collect();
        let mut weights = vec![h; n_nodes];
        weights[0] = 0.5 * h;
        weights[n_nodes - 1] = 0.5 * h;
        Ok(Self {
            lower,
            upper,
            nodes,
            weights,
        })
    }

    /// Arbitrary rule; checked against the grid invariants.
    pub fn from_parts(lower: f64, upper: f64, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(Error::InvalidInterval { lower, upper });
        }
        if nodes.len() < 2 {
            return Err(Error::TooFewNodes(nodes.len()));
        }
        if weights.len() != nodes.len() {
            return Err(Error::LengthMismatch {
                expected: nodes.len(),
                found: weights.len(),
            });
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        if nodes[0] < lower || nodes[nodes.len() - 1] > upper {
            return Err(Error::InvalidGrid("nodes outside the interval".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidGrid("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        let length = upper - lower;
        if ((total - length) / length).abs() > 1e-10 {
            return Err(Error::InvalidGrid(format!(
                "weights sum to {total}, interval length is {length}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            nodes,
            weights,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Evaluates `f` at every node.
    pub fn tabulate(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&t| f(t)).collect()
    }

    /// Weighted sum `Σ w_k f_k g_k`. The product `f_k g_k` is formed first so
    /// the result is bitwise symmetric in its arguments.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.check_len(f.len())?;
        self.check_len(g.len())?;
        Ok(self
            .weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * (a * b))
            .sum())
    }

    pub fn norm(&self, f: &[f64]) -> Result<f64> {
        Ok(self.inner(f, f)?.max(0.0).sqrt())
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found != self.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: self.nodes.len(),
                found,
            });
        }
        Ok(())
    }
}

/// One predictor function, stored by its values at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    pub id: i64,
    values: Vec<f64>,
}

impl FunctionalSample {
    pub fn new(id: i64, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample values"));
        }
        Ok(Self { id, values })
    }

    /// Tabulates `f` on `grid`.
    pub fn from_fn(id: i64, grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(id, grid.tabulate(f))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_id(mut self, id: i64) -> Self {
        self.id = id;
        self
    }

    pub fn conforms_to(&self, grid: &Grid) -> bool {
        self.values.len() == grid.len()
    }
}

/// `∫ f g dμ` by the grid's quadrature rule.
pub fn inner_product(f: &FunctionalSample, g: &FunctionalSample, grid: &Grid) -> Result<f64> {
    grid.inner(f.values(), g.values())
}

/// Training pairs `(X_i, Y_i)` on a shared grid.
#[derive(Debug, Clone)]
pub struct Dataset {
    grid: Arc<Grid>,
    samples: Vec<FunctionalSample>,
    responses: Vec<f64>,
    kappa_bound: Option<f64>,
}

impl Dataset {
    pub fn new(grid: Arc<Grid>, samples: Vec<FunctionalSample>, responses: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if samples.len() != responses.len() {
            return Err(Error::LengthMismatch {
                expected: samples.len(),
                found: responses.len(),
            });
        }
        if let Some(bad) = samples.iter().find(|s| !s.conforms_to(&grid)) {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: bad.len(),
            });
        }
        if responses.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFinite("responses"));
        }
        Ok(Self {
            grid,
            samples,
            responses,
            kappa_bound: None,
        })
    }

    /// Attaches the bound `κ` on the L² norm of every predictor and checks it.
    pub fn with_kappa_bound(mut self, kappa: f64) -> Result<Self> {
        for s in &self.samples {
            let norm = self.grid.norm(s.values())?;
            if norm > kappa {
                return Err(Error::KappaExceeded {
                    id: s.id,
                    norm,
                    bound: kappa,
                });
            }
        }
        self.kappa_bound = Some(kappa);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<Grid> {
        Arc::clone(&self.grid)
    }

    pub fn samples(&self) -> &[FunctionalSample] {
        &self.samples
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn kappa_bound(&self) -> Option<f64> {
        self.kappa_bound
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The first `n` samples.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let n = n.min(self.len());
        Ok(Self {
            grid: Arc::clone(&self.grid),
            samples: self.samples[..n].to_vec(),
            responses: self.responses[..n].to_vec(),
            kappa_bound: self.kappa_bound,
        })
    }

    /// Samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let samples = indices.iter().map(|&i| self.samples[i].clone()).collect();
        let responses = indices.iter().map(|&i| self.responses[i]).collect();
        let mut out = Self::new(Arc::clone(&self.grid), samples, responses)?;
        out.kappa_bound = self.kappa_bound;
        Ok(out)
    }

    /// True when `other` is on the same quadrature rule.
    pub fn same_grid(&self, grid: &Grid) -> bool {
        *self.grid == *grid
    }
}

/// Pairwise inner products `c_{i,s} = ∫ X_i X_s dμ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
}

impl GramMatrix {
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::LengthMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, s: usize) -> f64 {
        self.entries[(i, s)]
    }

    /// Entrywise power `(c_{i,s})^l`.
    pub fn hadamard_power(&self, l: usize) -> DMatrix<f64> {
        self.entries.map(|c| c.powi(l as i32))
    }

    /// Smallest eigenvalue; diagnostic for positive semidefiniteness.
    pub fn min_eigenvalue(&self) -> f64 {
        self.entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|s| (self.entries[(i, s)] - self.entries[(s, i)]).abs() <= tol))
    }
}

pub fn gram(dataset: &Dataset) -> GramMatrix {
    let n = dataset.len();
    let grid = dataset.grid();
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for s in 0..=i {
            // Conformity was checked when the dataset was built.
            let c = inner_product(&dataset.samples[i], &dataset.samples[s], grid)
                .expect("dataset samples conform to their grid");
            entries[(i, s)] = c;
            entries[(s, i)] = c;
        }
    }
    GramMatrix { entries }
}

/// Inner products of every training predictor with `x`.
pub fn cross_inner(dataset: &Dataset, x: &FunctionalSample) -> Result<Vec<f64>> {
    if !x.conforms_to(dataset.grid()) {
        return Err(Error::GridMismatch);
    }
    dataset
        .samples()
        .iter()
        .map(|s| inner_product(s, x, dataset.grid()))
        .collect()
}

/// Maps a raw profile onto grid nodes.
pub trait ProfileInterpolator {
    /// `positions` is strictly increasing and brackets every target.
    fn resample(&self, positions: &[f64], values: &[f64], targets: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PiecewiseLinear;

impl ProfileInterpolator for PiecewiseLinear {
    fn resample(&self, positions: &[f64], values: &[f64], targets: &[f64]) -> Vec<f64> {
        let last = positions.len() - 1;
        let mut seg = 0;
        targets
            .iter()
            .map(|&t| {
                while seg + 1 < last && positions[seg + 1] < t {
                    seg += 1;
                }
                let (x0, x1) = (positions[seg], positions[seg + 1]);
                let (y0, y1) = (values[seg], values[seg + 1]);
                let theta = ((t - x0) / (x1 - x0)).clamp(0.0, 1.0);
                y0 + theta * (y1 - y0)
            })
            .collect()
    }
}

/// Resamples a raw `(position, value)` profile onto `grid` by linear
/// interpolation. The profile must cover the whole grid interval.
pub fn ingest_profile(positions: &[f64], values: &[f64], grid: &Grid) -> Result<FunctionalSample> {
    ingest_profile_with(&PiecewiseLinear, positions, values, grid)
}

pub fn ingest_profile_with(
    interpolator: &impl ProfileInterpolator,
    positions: &[f64],
    values: &[f64],
    grid: &Grid,
) -> Result<FunctionalSample> {
    if positions.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: positions.len(),
            found: values.len(),
        });
    }
    if positions.len() < 2 {
        return Err(Error::TooFewNodes(positions.len()));
    }
    if positions.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("profile"));
    }
    if positions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotonePositions);
    }
    let (first, last) = (positions[0], positions[positions.len() - 1]);
    let slack = 1e-9 * (grid.upper() - grid.lower());
    if first > grid.lower() + slack || last < grid.upper() - slack {
        return Err(Error::GridNotCovered {
            first,
            last,
            lower: grid.lower(),
            upper: grid.upper(),
        });
    }
    FunctionalSample::new(0, interpolator.resample(positions, values, grid.nodes()))
}
