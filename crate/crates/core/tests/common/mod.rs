//! Independent reference computations shared by the integration and
//! acceptance tests. Nothing here calls into the solver, the aggregation, or
//! the error evaluation under test; only data containers and quadrature
//! weights are borrowed from the library.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use polyfreg::{Dataset, FunctionalSample, Grid, LambdaVector};
use rand::Rng;

/// Smooth random predictor on `[0, 1]`: a few sines and cosines with
/// random amplitudes.
pub fn random_function(rng: &mut impl Rng, id: i64, grid: &Grid) -> FunctionalSample {
    let amps: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let shift: f64 = rng.random_range(0.0..1.0);
    FunctionalSample::from_fn(id, grid, |t| {
        amps[0]
            + amps[1] * (2.0 * PI * t).cos()
            + amps[2] * (2.0 * PI * (t + shift)).sin()
            + amps[3] * (4.0 * PI * t).cos()
            + amps[4] * t * t
    })
    .unwrap()
}

pub fn random_dataset(rng: &mut impl Rng, n: usize, nodes: usize) -> Arc<Dataset> {
    let grid = Arc::new(Grid::uniform(0.0, 1.0, nodes).unwrap());
    let samples: Vec<_> = (0..n).map(|i| random_function(rng, i as i64, &grid)).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    Arc::new(Dataset::new(grid, samples, y).unwrap())
}

/// Log-uniform draw from `[lo, hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Explicit tensor feature `x^{⊗l}` scaled by the square root of the
/// product quadrature weights, flattened row-major.
fn weighted_tensor(x: &[f64], w: &[f64], l: usize) -> Vec<f64> {
    let base: Vec<f64> = x.iter().zip(w).map(|(xi, wi)| xi * wi.sqrt()).collect();
    let mut out = vec![1.0];
    for _ in 0..l {
        let mut next = Vec::with_capacity(out.len() * base.len());
        for a in &out {
            for b in &base {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

/// Minimizer of the discretized empirical Tikhonov functional
///
///   (1/N) Σ_i (Y_i − u(X_i))² + λ₀ u₀² + Σ_l λ_l ‖u_l‖²,
///
/// with every `u_l` an explicit tensor on the `l`-fold product grid, and
/// its predictions at `xs`. The quadratic is minimized over the full
/// primal space by a Galerkin solve on a fully reorthogonalized Krylov
/// basis, which is exact once the basis stops growing.
pub fn primal_tikhonov_predictions(data: &Dataset, lambda: &LambdaVector, xs: &[FunctionalSample]) -> Vec<f64> {
    let w = data.grid().weights();
    let p = lambda.order();
    let n = data.len();
    // Variables z = (√λ₀ u₀, √λ_1 v_1, …) so the penalty is ‖z‖².
    let features = |x: &[f64]| -> Vec<f64> {
        let mut f = vec![1.0 / lambda.get(0).sqrt()];
        for l in 1..=p {
            let s = 1.0 / lambda.get(l).sqrt();
            f.extend(weighted_tensor(x, w, l).into_iter().map(|v| v * s));
        }
        f
    };
    let psi: Vec<Vec<f64>> = data.samples().iter().map(|s| features(s.values())).collect();
    let dim = psi[0].len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // Hessian / 2: z + (1/N) Ψᵀ Ψ z.
    let apply = |z: &[f64]| -> Vec<f64> {
        let mut out = z.to_vec();
        for row in &psi {
            let c = dot(row, z) / n as f64;
            for (o, r) in out.iter_mut().zip(row) {
                *o += c * r;
            }
        }
        out
    };
    let mut g = vec![0.0; dim];
    for (row, y) in psi.iter().zip(data.responses()) {
        for (gi, r) in g.iter_mut().zip(row) {
            *gi += y * r / n as f64;
        }
    }

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut candidate = g.clone();
    loop {
        let scale = dot(&candidate, &candidate).sqrt();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &candidate);
                for (v, qi) in candidate.iter_mut().zip(q) {
                    *v -= c * qi;
                }
            }
        }
        let norm = dot(&candidate, &candidate).sqrt();
        if norm <= 1e-10 * scale || basis.len() >= dim {
            break;
        }
        candidate.iter_mut().for_each(|v| *v /= norm);
        basis.push(candidate.clone());
        candidate = apply(&candidate);
    }

    let m = basis.len();
    let applied: Vec<Vec<f64>> = basis.iter().map(|q| apply(q)).collect();
    let h = DMatrix::from_fn(m, m, |i, j| dot(&basis[i], &applied[j]));
    let rhs = DVector::from_fn(m, |i, _| dot(&basis[i], &g));
    let coef = h.lu().solve(&rhs).expect("projected Hessian is SPD");
    let mut z = vec![0.0; dim];
    for (q, c) in basis.iter().zip(coef.iter()) {
        for (zi, qi) in z.iter_mut().zip(q) {
            *zi += c * qi;
        }
    }
    xs.iter().map(|x| dot(&features(x.values()), &z)).collect()
}

/// Residual norm of the least-squares projection of the two-variable
/// function `f` onto span{X_i ⊗ X_i}, everything tabulated on the
/// `G × G` product of `grid`.
pub fn tensor_projection_residual(samples: &[FunctionalSample], grid: &Grid, f: impl Fn(f64, f64) -> f64) -> f64 {
    let t = grid.nodes();
    let w = grid.weights();
    let g = t.len();
    let target: Vec<f64> = (0..g * g).map(|k| f(t[k / g], t[k % g])).collect();
    let weight: Vec<f64> = (0..g * g).map(|k| w[k / g] * w[k % g]).collect();
    let tensors: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let x = s.values();
            (0..g * g).map(|k| x[k / g] * x[k % g]).collect()
        })
        .collect();
    let inner = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&weight).map(|((x, y), w)| x * y * w).sum::<f64>();
    let n = tensors.len();
    let m = DMatrix::from_fn(n, n, |i, j| inner(&tensors[i], &tensors[j]));
    let b = DVector::from_fn(n, |i, _| inner(&tensors[i], &target));
    let svd = m.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-12;
    let c = svd.solve(&b, cutoff).expect("svd solve");
    let resid: Vec<f64> = (0..g * g)
        .map(|k| target[k] - (0..n).map(|i| c[i] * tensors[i][k]).sum::<f64>())
        .collect();
    inner(&resid, &resid).sqrt()
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting
/// one half.
pub fn brute_force_auc(scores: &[f64], positives: &[bool]) -> Option<f64> {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (i, &pi) in positives.iter().enumerate() {
        for (j, &pj) in positives.iter().enumerate() {
            if pi && !pj {
                pairs += 1;
                total += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    (pairs > 0).then(|| total / pairs as f64)
}

/// Mean squared error computed directly.
pub fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
}
