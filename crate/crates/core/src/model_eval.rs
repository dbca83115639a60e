//! Analytic targets in separable form and the `𝕃²` distance between a fitted
//! representer and such a target.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::funcdata::{Dataset, FunctionalSample, GramMatrix, Grid};
use crate::mp_solver::{PolyModel, Representer};

/// Univariate building block of a separable kernel term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorSpec {
    /// `cos(k t)`
    Cos(f64),
    /// constant `c`
    Const(f64),
}

impl FactorSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            FactorSpec::Cos(k) => (k * t).cos(),
            FactorSpec::Const(c) => c,
        }
    }
}

impl FromStr for FactorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("factor `{s}` is not `kind:value`")))?;
        let value: f64 = arg
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number in factor `{s}`")))?;
        match kind.trim() {
            "cos" => Ok(FactorSpec::Cos(value)),
            "const" => Ok(FactorSpec::Const(value)),
            other => Err(Error::Parse(format!("unknown factor kind `{other}`"))),
        }
    }
}

impl fmt::Display for FactorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorSpec::Cos(k) => write!(f, "cos:{k}"),
            FactorSpec::Const(c) => write!(f, "const:{c}"),
        }
    }
}

/// `coefficient · g₁(s₁) ⋯ g_l(s_l)` with each `g_j` tabulated on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub coefficient: f64,
    factors: Vec<Vec<f64>>,
}

impl SeparableTerm {
    pub fn new(coefficient: f64, factors: Vec<Vec<f64>>) -> Self {
        Self { coefficient, factors }
    }

    pub fn from_specs(coefficient: f64, specs: &[FactorSpec], grid: &Grid) -> Self {
        let factors = specs.iter().map(|s| grid.tabulate(|t| s.eval(t))).collect();
        Self::new(coefficient, factors)
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }
}

/// Target `u⁺ = (u₀⁺, …, u_p⁺)` with each `u_l⁺` a sum of separable terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthPolynomial {
    pub constant: f64,
    /// `terms[l - 1]` are the terms of `u_l⁺`.
    terms: Vec<Vec<SeparableTerm>>,
}

impl TruthPolynomial {
    pub fn new(constant: f64, terms: Vec<Vec<SeparableTerm>>) -> Result<Self> {
        for (idx, degree_terms) in terms.iter().enumerate() {
            if let Some(bad) = degree_terms.iter().find(|t| t.degree() != idx + 1) {
                return Err(Error::OrderMismatch {
                    expected: idx + 1,
                    found: bad.degree(),
                });
            }
        }
        Ok(Self { constant, terms })
    }

    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn degree_terms(&self, degree: usize) -> &[SeparableTerm] {
        &self.terms[degree - 1]
    }

    /// Extends to `order` with empty (zero) higher-degree kernels.
    pub fn padded(&self, order: usize) -> Self {
        let mut out = self.clone();
        if out.terms.len() < order {
            out.terms.resize_with(order, Vec::new);
        }
        out
    }

    /// The toy target: `u₀⁺ = 2`, `u₁⁺ = 1 + 4 cos t + cos 5t`,
    /// `u₂⁺ = cos 3t + cos 2t cos 2τ`.
    pub fn toy(grid: &Grid) -> Self {
        use FactorSpec::{Const, Cos};
        let linear = vec![
            SeparableTerm::from_specs(1.0, &[Const(1.0)], grid),
            SeparableTerm::from_specs(4.0, &[Cos(1.0)], grid),
            SeparableTerm::from_specs(1.0, &[Cos(5.0)], grid),
        ];
        let quadratic = vec![
            SeparableTerm::from_specs(1.0, &[Cos(3.0), Const(1.0)], grid),
            SeparableTerm::from_specs(1.0, &[Cos(2.0), Cos(2.0)], grid),
        ];
        Self {
            constant: 2.0,
            terms: vec![linear, quadratic],
        }
    }

    /// Reads `degree,coefficient,factor_1,…,factor_l` rows. Degree-0 rows
    /// add to the constant. No header.
    pub fn from_csv(reader: impl Read, grid: &Grid) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut constant = 0.0;
        let mut terms: Vec<Vec<SeparableTerm>> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::Parse("truth row needs degree and coefficient".into()));
            }
            let degree: usize = record[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad degree `{}`", &record[0])))?;
            let coefficient: f64 = record[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient `{}`", &record[1])))?;
            let specs = record
                .iter()
                .skip(2)
                .map(FactorSpec::from_str)
                .collect::<Result<Vec<_>>>()?;
            if specs.len() != degree {
                return Err(Error::OrderMismatch {
                    expected: degree,
                    found: specs.len(),
                });
            }
            if degree == 0 {
                constant += coefficient;
                continue;
            }
            if terms.len() < degree {
                terms.resize_with(degree, Vec::new);
            }
            terms[degree - 1].push(SeparableTerm::from_specs(coefficient, &specs, grid));
        }
        Self::new(constant, terms)
    }

    /// `‖u_l⁺‖²` as a double sum over term pairs of products of 1-D inner
    /// products.
    pub fn degree_norm_squared(&self, degree: usize, grid: &Grid) -> Result<f64> {
        let terms = self.degree_terms(degree);
        let mut total = 0.0;
        for a in terms {
            for b in terms {
                let mut prod = a.coefficient * b.coefficient;
                for (fa, fb) in a.factors.iter().zip(&b.factors) {
                    prod *= grid.inner(fa, fb)?;
                }
                total += prod;
            }
        }
        Ok(total)
    }

    pub fn norm_squared(&self, grid: &Grid) -> Result<f64> {
        let mut total = self.constant * self.constant;
        for l in 1..=self.order() {
            total += self.degree_norm_squared(l, grid)?;
        }
        Ok(total)
    }

    /// `u₀⁺ + Σ_l ⟨u_l⁺, x^{⊗l}⟩`, the noiseless response to `x`.
    pub fn response(&self, x: &FunctionalSample, grid: &Grid) -> Result<f64> {
        let mut y = self.constant;
        for l in 1..=self.order() {
            y += truth_inner_with_tensor(self.degree_terms(l), x, grid)?;
        }
        Ok(y)
    }
}

/// `⟨u_l⁺, x ⊗ ⋯ ⊗ x⟩ = Σ_terms coefficient · Π_j ⟨g_j, x⟩`.
pub fn truth_inner_with_tensor(terms: &[SeparableTerm], x: &FunctionalSample, grid: &Grid) -> Result<f64> {
    if !x.conforms_to(grid) {
        return Err(Error::GridMismatch);
    }
    let mut total = 0.0;
    for term in terms {
        let mut prod = term.coefficient;
        for g in &term.factors {
            prod *= grid.inner(g, x.values())?;
        }
        total += prod;
    }
    Ok(total)
}

/// `‖u⁺ − u‖_{𝕃²}` for a model fitted on `model.training()`.
pub fn l2_error(model: &PolyModel, truth: &TruthPolynomial, gram: &GramMatrix) -> Result<f64> {
    representer_l2_error(model.representer(), model.training(), truth, gram)
}

/// Same as [`l2_error`] for a bare representer on `training`.
pub fn representer_l2_error(
    rep: &Representer,
    training: &Dataset,
    truth: &TruthPolynomial,
    gram: &GramMatrix,
) -> Result<f64> {
    if rep.order() != truth.order() {
        return Err(Error::OrderMismatch {
            expected: truth.order(),
            found: rep.order(),
        });
    }
    let n = training.len();
    if rep.n_samples() != n || gram.dim() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: rep.n_samples().min(gram.dim()),
        });
    }
    let grid = training.grid();
    let d0 = truth.constant - rep.intercept;
    let mut sq = d0 * d0;
    for l in 1..=rep.order() {
        let terms = truth.degree_terms(l);
        let mut cross = 0.0;
        for (i, x) in training.samples().iter().enumerate() {
            cross += rep.coeff(l, i) * truth_inner_with_tensor(terms, x, grid)?;
        }
        let pow = gram.hadamard_power(l);
        let b = rep.coeffs.row(l - 1).transpose();
        let model_sq = (b.transpose() * &pow * &b)[(0, 0)];
        sq += truth.degree_norm_squared(l, grid)? - 2.0 * cross + model_sq;
    }
    Ok(sq.max(0.0).sqrt())
}

/// `‖u_a − u_b‖_{𝕃²}` for two representers over the same training inputs.
pub fn representer_distance(a: &Representer, b: &Representer, gram: &GramMatrix) -> Result<f64> {
    if a.order() != b.order() {
        return Err(Error::OrderMismatch {
            expected: a.order(),
            found: b.order(),
        });
    }
    let diff = Representer::linear_combination(&[1.0, -1.0], [a, b])?;
    let mut sq = diff.intercept * diff.intercept;
    for l in 1..=diff.order() {
        let pow = gram.hadamard_power(l);
        let v = diff.coeffs.row(l - 1).transpose();
        sq += (v.transpose() * &pow * &v)[(0, 0)];
    }
    Ok(sq.max(0.0).sqrt())
}

/// `(1/N) Σ_i (Y_i − pred_i)²`.
pub fn empirical_risk(predictions: &[f64], responses: &[f64]) -> Result<f64> {
    if predictions.len() != responses.len() {
        return Err(Error::LengthMismatch {
            expected: responses.len(),
            found: predictions.len(),
        });
    }
    if responses.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sum: f64 = predictions.iter().zip(responses).map(|(p, y)| (y - p) * (y - p)).sum();
    Ok(sum / responses.len() as f64)
}

/// Norm of the part of the toy target no symmetric quadratic kernel can
/// reach: the antisymmetric half of `cos 3t ⊗ 1`.
pub fn toy_saturation_level() -> f64 {
    PI
}
