//! Experiment drivers: the cosine toy problem and the stenosis-style
//! classification protocol.

pub mod classify;
pub mod surrogate;
pub mod toy;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use classify::{
    auc_rank, binary_metrics, classify_eval, evaluate_runs, roc_curve, stratified_split, BinaryMetrics, ClassifyReport,
    EvalConfig, EvaluationSummary, MetricsMean,
};
pub use surrogate::{synthetic_stenosis, SurrogateConfig};
pub use toy::{
    error_curve, toy_holdout_sample, toy_predictor, toy_sample, CurveModel, ErrorCurve, ErrorCurveRow, ToyAggregation,
    ToyConfig,
};

/// Independent random stream for task `index` of kind `domain`, so results do
/// not depend on scheduling.
pub fn task_rng(seed: u64, domain: u32, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 48) ^ index);
    rng
}

pub(crate) const TOY_STREAM: u32 = 1;
pub(crate) const SPLIT_STREAM: u32 = 2;
pub(crate) const SURROGATE_STREAM: u32 = 3;
pub(crate) const TOY_HOLDOUT_STREAM: u32 = 4;
