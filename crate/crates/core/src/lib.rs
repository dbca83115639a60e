//! Polynomial functional regression with one Tikhonov penalty per degree
//! block, and least-squares aggregation of a family of such models.
//!
//! Predictors are functions tabulated on a quadrature [`Grid`]. A model of
//! order `p` maps a predictor `X` to
//!
//! ```text
//! u₀ + Σ_{l=1}^{p} ∫ u_l(s_1, …, s_l) X(s_1) ⋯ X(s_l) ds
//! ```
//!
//! and is fitted through its representer coefficients ([`mp_solver`]).
//! [`aggregation`] combines several fitted models, [`model_eval`] measures the
//! distance to an analytic target, and [`experiments`] holds the toy and
//! classification protocols.

pub mod aggregation;
pub mod error;
pub mod experiments;
pub mod funcdata;
pub mod io;
pub mod linalg;
pub mod model_eval;
pub mod mp_solver;

pub use aggregation::{aggregate, predict_aggregated, AggregatedModel};
pub use error::{Error, Result};
pub use funcdata::{gram, inner_product, Dataset, FunctionalSample, GramMatrix, Grid};
pub use model_eval::{empirical_risk, l2_error, TruthPolynomial};
pub use mp_solver::{assemble_system, fit, fit_with_gram, predict, LambdaVector, PolyModel, Representer};
