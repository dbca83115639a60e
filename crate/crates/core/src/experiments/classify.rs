//! Thresholded classification with regression scores: sensitivity,
//! specificity, ROC and rank-statistic AUC, plus the repeated stratified
//! train/test protocol.

use std::cmp::Ordering;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{task_rng, SPLIT_STREAM};
use crate::aggregation::{aggregate, predict_aggregated_many};
use crate::error::{Error, Result};
use crate::funcdata::{gram, Dataset};
use crate::mp_solver::{fit_with_gram, predict_many, LambdaVector, PolyModel};

/// Severity scale of the labels; `0` is healthy.
pub const LABEL_SCALE: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

pub fn is_positive_label(label: f64) -> bool {
    label > 0.0
}

pub fn validate_labels(labels: &[f64]) -> Result<()> {
    match labels.iter().find(|y| !LABEL_SCALE.contains(y)) {
        Some(&bad) => Err(Error::InvalidLabel(bad)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMetrics {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    /// `None` when there are no positives.
    pub sensitivity: Option<f64>,
    /// `None` when there are no negatives.
    pub specificity: Option<f64>,
    /// `None` unless both classes are present.
    pub auc: Option<f64>,
    /// `(1 − SP, SE)` over every observed-score threshold, from `(0, 0)` to
    /// `(1, 1)`.
    pub roc_points: Vec<(f64, f64)>,
}

/// Metrics for calling `score > threshold` positive.
pub fn binary_metrics(scores: &[f64], positives: &[bool], threshold: f64) -> Result<BinaryMetrics> {
    if scores.len() != positives.len() {
        return Err(Error::LengthMismatch {
            expected: positives.len(),
            found: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("scores"));
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for (&s, &pos) in scores.iter().zip(positives) {
        match (s > threshold, pos) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(BinaryMetrics {
        tp,
        tn,
        fp,
        fn_,
        sensitivity: ratio(tp, tp + fn_),
        specificity: ratio(tn, tn + fp),
        auc: auc_rank(scores, positives),
        roc_points: roc_curve(scores, positives),
    })
}

/// Mann–Whitney AUC with mid-ranks for ties; `None` if a class is empty.
pub fn auc_rank(scores: &[f64], positives: &[bool]) -> Option<f64> {
    let n_pos = positives.iter().filter(|&&p| p).count();
    let n_neg = positives.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start..end (0-based) share the 1-based mid-rank.
        let mid_rank = (start + end + 1) as f64 / 2.0;
        let tied_pos = order[start..end].iter().filter(|&&i| positives[i]).count();
        pos_rank_sum += mid_rank * tied_pos as f64;
        start = end;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// ROC points from sweeping the threshold down through the distinct scores.
pub fn roc_curve(scores: &[f64], positives: &[bool]) -> Vec<(f64, f64)> {
    let n_pos = positives.iter().filter(|&&p| p).count();
    let n_neg = positives.len() - n_pos;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let rate = |k: usize, total: usize| if total == 0 { 0.0 } else { k as f64 / total as f64 };
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0, 0);
    let mut idx = 0;
    while idx < order.len() {
        let s = scores[order[idx]];
        while idx < order.len() && scores[order[idx]] == s {
            if positives[order[idx]] {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        points.push((rate(fp, n_neg), rate(tp, n_pos)));
    }
    if points.last() != Some(&(1.0, 1.0)) {
        points.push((1.0, 1.0));
    }
    points
}

#[derive(Debug, Clone)]
pub struct ClassifyReport {
    pub lambda_grid: Vec<LambdaVector>,
    /// One entry per λ, `None` when that fit failed.
    pub per_model: Vec<Option<BinaryMetrics>>,
    /// `None` when the aggregation failed.
    pub aggregated: Option<BinaryMetrics>,
}

/// Fits every λ on `train`, aggregates on `train`, and scores `test`.
pub fn classify_eval(
    train: Arc<Dataset>,
    test: &Dataset,
    lambda_grid: &[LambdaVector],
    order: usize,
    threshold: f64,
) -> Result<ClassifyReport> {
    if let Some(l) = lambda_grid.iter().find(|l| l.order() != order) {
        return Err(Error::OrderMismatch {
            expected: order,
            found: l.order(),
        });
    }
    if lambda_grid.is_empty() {
        return Err(Error::InvalidLambda("empty λ grid".into()));
    }
    validate_labels(train.responses())?;
    validate_labels(test.responses())?;
    if train.grid() != test.grid() {
        return Err(Error::GridMismatch);
    }
    let truth: Vec<bool> = test.responses().iter().map(|&y| is_positive_label(y)).collect();
    let g = gram(&train);
    let mut fitted: Vec<PolyModel> = Vec::new();
    let mut per_model = Vec::with_capacity(lambda_grid.len());
    for lambda in lambda_grid {
        let metrics = fit_with_gram(train.clone(), &g, lambda).ok().and_then(|m| {
            let scores = predict_many(&m, test.samples()).ok()?;
            fitted.push(m);
            binary_metrics(&scores, &truth, threshold).ok()
        });
        per_model.push(metrics);
    }
    let aggregated = aggregate(fitted, &train).ok().and_then(|agg| {
        let scores = predict_aggregated_many(&agg, test.samples()).ok()?;
        binary_metrics(&scores, &truth, threshold).ok()
    });
    Ok(ClassifyReport {
        lambda_grid: lambda_grid.to_vec(),
        per_model,
        aggregated,
    })
}

/// Draws `train_pos` positives and `train_neg` negatives without replacement
/// for training; everything else goes to test. Both keep the input order.
pub fn stratified_split(
    dataset: &Dataset,
    train_pos: usize,
    train_neg: usize,
    rng: &mut impl Rng,
) -> Result<(Dataset, Dataset)> {
    let (pos, neg): (Vec<usize>, Vec<usize>) =
        (0..dataset.len()).partition(|&i| is_positive_label(dataset.responses()[i]));
    if pos.len() < train_pos || neg.len() < train_neg {
        return Err(Error::InsufficientStratum {
            needed_pos: train_pos,
            needed_neg: train_neg,
            have_pos: pos.len(),
            have_neg: neg.len(),
        });
    }
    let mut in_train = vec![false; dataset.len()];
    for &i in pos.choose_multiple(rng, train_pos) {
        in_train[i] = true;
    }
    for &i in neg.choose_multiple(rng, train_neg) {
        in_train[i] = true;
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..dataset.len()).partition(|&i| in_train[i]);
    if train.is_empty() || test.is_empty() {
        return Err(Error::InsufficientStratum {
            needed_pos: train_pos,
            needed_neg: train_neg,
            have_pos: pos.len(),
            have_neg: neg.len(),
        });
    }
    Ok((dataset.select(&train)?, dataset.select(&test)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub order: usize,
    pub lambda_grid: Vec<LambdaVector>,
    pub threshold: f64,
    pub runs: usize,
    pub seed: u64,
    pub train_pos: usize,
    pub train_neg: usize,
}

impl EvalConfig {
    /// `{10⁻², 10⁻¹, 1}` for every λ_l, 10 runs, 4/16 training split,
    /// threshold 0.5.
    pub fn with_order(order: usize) -> Self {
        let candidates = vec![1e-2, 1e-1, 1.0];
        Self {
            order,
            lambda_grid: LambdaVector::grid(&vec![candidates; order + 1]).expect("static grid"),
            threshold: 0.5,
            runs: 10,
            seed: 0,
            train_pos: 4,
            train_neg: 16,
        }
    }
}

/// Arithmetic means over runs, skipping runs where a metric is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsMean {
    pub sensitivity: f64,
    pub specificity: f64,
    pub auc: f64,
    pub runs: usize,
}

impl MetricsMean {
    pub fn from_runs<'a>(runs: impl IntoIterator<Item = Option<&'a BinaryMetrics>>) -> Self {
        let runs: Vec<&BinaryMetrics> = runs.into_iter().flatten().collect();
        let mean = |f: &dyn Fn(&BinaryMetrics) -> Option<f64>| {
            let vals: Vec<f64> = runs.iter().filter_map(|m| f(m)).collect();
            if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        };
        Self {
            sensitivity: mean(&|m| m.sensitivity),
            specificity: mean(&|m| m.specificity),
            auc: mean(&|m| m.auc),
            runs: runs.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationSummary {
    pub lambda_grid: Vec<LambdaVector>,
    pub per_model: Vec<MetricsMean>,
    pub aggregated: MetricsMean,
    /// Per-run reports in run order.
    pub reports: Vec<ClassifyReport>,
}

/// Repeats split → fit → aggregate → score for `config.runs` runs, in
/// parallel on the current rayon pool. Run `r` draws its split from its own
/// stream, so the result is independent of the worker count.
pub fn evaluate_runs(dataset: &Dataset, config: &EvalConfig) -> Result<EvaluationSummary> {
    if config.runs == 0 {
        return Err(Error::Parse("runs must be at least 1".into()));
    }
    validate_labels(dataset.responses())?;
    let reports = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = task_rng(config.seed, SPLIT_STREAM, run as u64);
            let (train, test) = stratified_split(dataset, config.train_pos, config.train_neg, &mut rng)?;
            classify_eval(
                Arc::new(train),
                &test,
                &config.lambda_grid,
                config.order,
                config.threshold,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let per_model = (0..config.lambda_grid.len())
        .map(|j| MetricsMean::from_runs(reports.iter().map(|r| r.per_model[j].as_ref())))
        .collect();
    let aggregated = MetricsMean::from_runs(reports.iter().map(|r| r.aggregated.as_ref()));
    Ok(EvaluationSummary {
        lambda_grid: config.lambda_grid.clone(),
        per_model,
        aggregated,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdata::{FunctionalSample, Grid};

    #[test]
    fn perfect_separation() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        let pos = [false, false, true, true];
        assert_eq!(auc_rank(&scores, &pos), Some(1.0));
    }

    #[test]
    fn constant_scores_give_half() {
        let scores = [0.3; 6];
        let pos = [true, false, true, false, false, false];
        assert_eq!(auc_rank(&scores, &pos), Some(0.5));
    }

    #[test]
    fn four_point_example() {
        let scores = [0.9, 0.1, 0.8, 0.2];
        let pos = [true, false, true, false];
        let m = binary_metrics(&scores, &pos, 0.5).unwrap();
        assert_eq!(m.auc, Some(1.0));
        assert_eq!(m.sensitivity, Some(1.0));
        assert_eq!(m.specificity, Some(1.0));
        assert_eq!((m.tp, m.tn, m.fp, m.fn_), (2, 2, 0, 0));
    }

    #[test]
    fn threshold_is_strict() {
        let m = binary_metrics(&[0.5, 0.5], &[true, false], 0.5).unwrap();
        assert_eq!((m.tp, m.fn_, m.tn, m.fp), (0, 1, 1, 0));
    }

    #[test]
    fn single_class_leaves_auc_undefined() {
        let m = binary_metrics(&[0.1, 0.7], &[false, false], 0.5).unwrap();
        assert_eq!(m.auc, None);
        assert_eq!(m.sensitivity, None);
        assert_eq!(m.specificity, Some(0.5));
    }

    #[test]
    fn roc_is_monotone_and_anchored() {
        let scores = [0.3, 0.7, 0.7, 0.1, 0.9];
        let pos = [false, true, false, false, true];
        let roc = roc_curve(&scores, &pos);
        assert_eq!(roc[0], (0.0, 0.0));
        assert_eq!(*roc.last().unwrap(), (1.0, 1.0));
        assert!(roc.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
    }

    #[test]
    fn labels_are_validated() {
        assert!(validate_labels(&[0.0, 0.25, 1.0]).is_ok());
        assert!(matches!(validate_labels(&[0.3]), Err(Error::InvalidLabel(_))));
    }

    fn labeled(n_pos: usize, n_neg: usize) -> Dataset {
        let grid = Arc::new(Grid::uniform(0.0, 1.0, 8).unwrap());
        let n = n_pos + n_neg;
        let samples = (0..n)
            .map(|i| FunctionalSample::new(i as i64, vec![i as f64; 8]).unwrap())
            .collect();
        let labels = (0..n).map(|i| if i < n_pos { 0.5 } else { 0.0 }).collect();
        Dataset::new(grid, samples, labels).unwrap()
    }

    #[test]
    fn split_counts() {
        let ds = labeled(7, 33);
        let mut rng = task_rng(0, SPLIT_STREAM, 0);
        let (train, test) = stratified_split(&ds, 4, 16, &mut rng).unwrap();
        let count = |d: &Dataset| d.responses().iter().filter(|&&y| y > 0.0).count();
        assert_eq!((count(&train), train.len()), (4, 20));
        assert_eq!((count(&test), test.len()), (3, 20));
    }

    #[test]
    fn split_with_no_positive_draw() {
        let ds = labeled(3, 10);
        let mut rng = task_rng(0, SPLIT_STREAM, 0);
        let (train, test) = stratified_split(&ds, 0, 5, &mut rng).unwrap();
        assert!(train.responses().iter().all(|&y| y == 0.0));
        assert_eq!(test.responses().iter().filter(|&&y| y > 0.0).count(), 3);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = labeled(7, 33);
        let ids = |d: &Dataset| d.samples().iter().map(|s| s.id).collect::<Vec<_>>();
        let a = stratified_split(&ds, 4, 16, &mut task_rng(5, SPLIT_STREAM, 2)).unwrap();
        let b = stratified_split(&ds, 4, 16, &mut task_rng(5, SPLIT_STREAM, 2)).unwrap();
        assert_eq!(ids(&a.0), ids(&b.0));
        assert_eq!(ids(&a.1), ids(&b.1));
    }

    #[test]
    fn split_insufficient_stratum() {
        let ds = labeled(2, 5);
        let mut rng = task_rng(0, SPLIT_STREAM, 0);
        assert!(matches!(
            stratified_split(&ds, 3, 2, &mut rng),
            Err(Error::InsufficientStratum { have_pos: 2, .. })
        ));
    }

    #[test]
    fn mean_skips_undefined() {
        let a = binary_metrics(&[0.9, 0.1], &[true, false], 0.5).unwrap();
        let b = binary_metrics(&[0.1, 0.2], &[false, false], 0.5).unwrap();
        let mean = MetricsMean::from_runs([Some(&a), Some(&b), None]);
        assert_eq!(mean.runs, 2);
        assert_eq!(mean.sensitivity, 1.0);
        assert_eq!(mean.specificity, 1.0);
        assert_eq!(mean.auc, 1.0);
    }
}
