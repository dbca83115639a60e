//! Multi-penalty Tikhonov fit of a degree-`p` polynomial functional model.
//!
//! The degree-`l` kernel of the fitted model is a combination of tensor
//! powers of the training inputs,
//!
//! ```text
//! u_l(s_1, …, s_l) = Σ_i b_{l,i} X_i(s_1) ⋯ X_i(s_l),
//! ```
//!
//! so the regularized normal equation reduces to `pN + 1` scalar equations in
//! the intercept `b₀` and the coefficients `b_{l,i}`. Unknowns are ordered
//! `[b₀; b_{1,1..N}; …; b_{p,1..N}]`. The intercept row is
//!
//! ```text
//! (λ₀ + 1) b₀ + (1/N) Σ_i Σ_l Σ_s b_{l,s} c_{i,s}^l = mean(Y)
//! ```
//!
//! and the row for `(k, i)`, multiplied through by `N`, is
//!
//! ```text
//! N λ_k b_{k,i} + b₀ + Σ_l Σ_s b_{l,s} c_{i,s}^l = Y_i.
//! ```

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcdata::{cross_inner, gram, Dataset, FunctionalSample, GramMatrix};
use crate::linalg::{residual_norm, solve_dense, SolveMethod};

/// One penalty weight per degree block, `(λ₀, …, λ_p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LambdaVector(Vec<f64>);

impl LambdaVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidLambda("need at least λ₀".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidLambda(format!("{bad} is not a finite nonnegative value")));
        }
        Ok(Self(values))
    }

    /// The same `λ` on every block.
    pub fn uniform(order: usize, lambda: f64) -> Result<Self> {
        Self::new(vec![lambda; order + 1])
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, degree: usize) -> f64 {
        self.0[degree]
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * t).collect())
    }

    /// Cartesian product of per-degree candidate lists, first degree varying
    /// slowest.
    pub fn grid(per_degree: &[Vec<f64>]) -> Result<Vec<Self>> {
        if per_degree.is_empty() || per_degree.iter().any(Vec::is_empty) {
            return Err(Error::InvalidLambda("empty candidate list".into()));
        }
        let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
        for candidates in per_degree {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    candidates.iter().map(move |&v| {
                        let mut next = prefix.clone();
                        next.push(v);
                        next
                    })
                })
                .collect();
        }
        combos.into_iter().map(Self::new).collect()
    }
}

impl TryFrom<Vec<f64>> for LambdaVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<LambdaVector> for Vec<f64> {
    fn from(l: LambdaVector) -> Self {
        l.0
    }
}

impl fmt::Display for LambdaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| format!("{v:e}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Intercept and per-degree coefficients of a model whose kernels are tensor
/// powers of some training inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Representer {
    pub intercept: f64,
    /// `p × N`, row `l − 1` holds `b_{l,·}`.
    pub coeffs: DMatrix<f64>,
}

impl Representer {
    pub fn zero(order: usize, n: usize) -> Self {
        Self {
            intercept: 0.0,
            coeffs: DMatrix::zeros(order, n),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.coeffs.ncols()
    }

    /// `b_{l,i}` for degree `l ≥ 1`.
    pub fn coeff(&self, degree: usize, i: usize) -> f64 {
        self.coeffs[(degree - 1, i)]
    }

    fn from_solution(order: usize, n: usize, x: &DVector<f64>) -> Self {
        let mut coeffs = DMatrix::zeros(order, n);
        for l in 0..order {
            for i in 0..n {
                coeffs[(l, i)] = x[1 + l * n + i];
            }
        }
        Self {
            intercept: x[0],
            coeffs,
        }
    }

    /// `b₀ + Σ_l Σ_i b_{l,i} z_i^l` for inner products `z_i = ⟨X_i, x⟩`.
    pub fn evaluate(&self, inner: &[f64]) -> f64 {
        let mut acc = self.intercept;
        for (i, &z) in inner.iter().enumerate() {
            let mut power = 1.0;
            for l in 0..self.order() {
                power *= z;
                acc += self.coeffs[(l, i)] * power;
            }
        }
        acc
    }

    /// Predictions at the training inputs themselves.
    pub fn fitted_values(&self, gram: &GramMatrix) -> Vec<f64> {
        (0..gram.dim())
            .map(|i| {
                let row: Vec<f64> = (0..gram.dim()).map(|s| gram.get(i, s)).collect();
                self.evaluate(&row)
            })
            .collect()
    }

    /// `Σ_r w_r · rep_r`; all representers must share training inputs.
    pub fn linear_combination<'a>(weights: &[f64], reps: impl IntoIterator<Item = &'a Representer>) -> Result<Self> {
        let reps: Vec<&Representer> = reps.into_iter().collect();
        if reps.is_empty() {
            return Err(Error::EmptyModelList);
        }
        if reps.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: reps.len(),
                found: weights.len(),
            });
        }
        let (order, n) = (reps[0].order(), reps[0].n_samples());
        let mut out = Self::zero(order, n);
        for (w, rep) in weights.iter().zip(&reps) {
            if rep.order() != order || rep.n_samples() != n {
                return Err(Error::OrderMismatch {
                    expected: order,
                    found: rep.order(),
                });
            }
            out.intercept += w * rep.intercept;
            out.coeffs += &rep.coeffs * *w;
        }
        Ok(out)
    }
}

/// Fitted model together with the data it was trained on.
#[derive(Debug, Clone)]
pub struct PolyModel {
    representer: Representer,
    lambda: LambdaVector,
    training: Arc<Dataset>,
    residual_norm: f64,
    condition: f64,
    method: SolveMethod,
}

impl PolyModel {
    /// Reassembles a model from stored coefficients, e.g. after loading it
    /// from disk.
    pub fn from_parts(representer: Representer, lambda: LambdaVector, training: Arc<Dataset>) -> Result<Self> {
        if representer.order() != lambda.order() {
            return Err(Error::OrderMismatch {
                expected: lambda.order(),
                found: representer.order(),
            });
        }
        if representer.n_samples() != training.len() {
            return Err(Error::LengthMismatch {
                expected: training.len(),
                found: representer.n_samples(),
            });
        }
        Ok(Self {
            representer,
            lambda,
            training,
            residual_norm: 0.0,
            condition: f64::NAN,
            method: SolveMethod::Lu,
        })
    }

    pub fn order(&self) -> usize {
        self.lambda.order()
    }

    pub fn intercept(&self) -> f64 {
        self.representer.intercept
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.representer.coeffs
    }

    pub fn representer(&self) -> &Representer {
        &self.representer
    }

    pub fn lambda(&self) -> &LambdaVector {
        &self.lambda
    }

    pub fn training(&self) -> &Arc<Dataset> {
        &self.training
    }

    /// `‖A x − rhs‖₂` of the representer system at fit time.
    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    /// Condition estimate of the representer system.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve_method(&self) -> SolveMethod {
        self.method
    }
}

/// Builds the `(pN+1)`-dimensional representer system.
pub fn assemble_system(
    dataset: &Dataset,
    gram: &GramMatrix,
    lambda: &LambdaVector,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = dataset.len();
    if gram.dim() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: gram.dim(),
        });
    }
    let p = lambda.order();
    let dim = p * n + 1;
    let nf = n as f64;
    let mut a = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);

    let y = dataset.responses();
    a[(0, 0)] = lambda.get(0) + 1.0;
    rhs[0] = y.iter().sum::<f64>() / nf;

    let powers: Vec<DMatrix<f64>> = (1..=p).map(|l| gram.hadamard_power(l)).collect();
    for (l, pow) in powers.iter().enumerate() {
        for s in 0..n {
            let col_sum: f64 = (0..n).map(|i| pow[(i, s)]).sum();
            a[(0, 1 + l * n + s)] = col_sum / nf;
        }
    }

    for k in 0..p {
        for i in 0..n {
            let row = 1 + k * n + i;
            a[(row, 0)] = 1.0;
            for (l, pow) in powers.iter().enumerate() {
                for s in 0..n {
                    a[(row, 1 + l * n + s)] = pow[(i, s)];
                }
            }
            a[(row, row)] += nf * lambda.get(k + 1);
            rhs[row] = y[i];
        }
    }
    Ok((a, rhs))
}

pub fn fit(dataset: Arc<Dataset>, lambda: &LambdaVector) -> Result<PolyModel> {
    let g = gram(&dataset);
    fit_with_gram(dataset, &g, lambda)
}

/// Fits against a precomputed Gram matrix, so a λ sweep shares one.
pub fn fit_with_gram(dataset: Arc<Dataset>, gram: &GramMatrix, lambda: &LambdaVector) -> Result<PolyModel> {
    let (a, rhs) = assemble_system(&dataset, gram, lambda)?;
    let sol = solve_dense(&a, &rhs)?;
    let residual = residual_norm(&a, &sol.x, &rhs);
    if !residual.is_finite() {
        return Err(Error::SolverFailure("non-finite residual".into()));
    }
    let representer = Representer::from_solution(lambda.order(), dataset.len(), &sol.x);
    Ok(PolyModel {
        representer,
        lambda: lambda.clone(),
        training: dataset,
        residual_norm: residual,
        condition: sol.condition,
        method: sol.method,
    })
}

/// `b₀ + Σ_l Σ_i b_{l,i} ⟨X_i, x⟩^l`.
pub fn predict(model: &PolyModel, x_new: &FunctionalSample) -> Result<f64> {
    let inner = cross_inner(&model.training, x_new)?;
    Ok(model.representer.evaluate(&inner))
}

pub fn predict_many(model: &PolyModel, xs: &[FunctionalSample]) -> Result<Vec<f64>> {
    xs.iter().map(|x| predict(model, x)).collect()
}
