//! Subcommand implementations. Every command writes its tables, plots, and a
//! `run.json` record into the output directory.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use polyfreg::aggregation::{aggregate, AggregatedModel};
use polyfreg::experiments::toy::error_curve;
use polyfreg::experiments::{
    evaluate_runs, synthetic_stenosis, CurveModel, ErrorCurve, EvaluationSummary, MetricsMean, ToyAggregation,
};
use polyfreg::io::{
    format_exact, load_model, read_model_meta, read_profiles, write_model_csv, write_model_meta, write_wide, ModelMeta,
};
use polyfreg::mp_solver::{fit_with_gram, predict_many};
use polyfreg::{empirical_risk, gram, Dataset, Grid, LambdaVector, PolyModel};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{data_grid, eval_config, surrogate_config, toy_config, ConfigMap};
use crate::svg::{LineChart, ReferenceLine, Series};
use crate::{Cli, CliError, Command, CommonArgs};

/// Fraction of failed cells above which a run exits with a numerical error.
pub const FAILURE_BUDGET: f64 = 0.10;

const MODELS_SUBDIR: &str = "models";
const TRAINING_FILE: &str = "training.csv";
const AGGREGATE_FILE: &str = "aggregate.csv";

/// What a command reports back for the run record.
struct Outcome {
    resolved: Value,
    outputs: Vec<String>,
    /// Error to surface after all outputs were written.
    deferred: Option<CliError>,
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let common = &cli.common;
    let cfg = common.resolve_config()?;
    fs::create_dir_all(&common.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", common.out.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
    let threads = pool.current_num_threads();

    let outcome = pool.install(|| match cli.command {
        Command::ToyCurve => toy_curve(&cfg, &common.out),
        Command::Fit => fit_command(&cfg, common),
        Command::Aggregate => aggregate_command(&cfg, common),
        Command::Evaluate => evaluate_command(&cfg, common),
        Command::Predict => predict_command(common),
    })?;

    let record = json!({
        "command": cli.command.name(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.get("seed", 0u64)?,
        "threads": threads,
        "config_file": common.config.as_ref().map(|p| p.display().to_string()),
        "config": cfg.entries(),
        "resolved": outcome.resolved,
        "outputs": outcome.outputs,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "status": match &outcome.deferred {
            None => "ok".to_string(),
            Some(e) => e.to_string(),
        },
    });
    write_with(&common.out.join("run.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &record).map_err(polyfreg::Error::from)?;
        writeln!(w)?;
        Ok(())
    })?;
    match outcome.deferred {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn write_with(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> polyfreg::Result<()>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))
}

fn over_budget(failed: usize, total: usize) -> bool {
    total > 0 && failed as f64 > FAILURE_BUDGET * total as f64
}

/// `1e-2/1e-1` style label, safe inside a CSV field.
pub fn lambda_label(lambda: &LambdaVector) -> String {
    lambda
        .values()
        .iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join("/")
}

/// Shortest round-trip decimal, in scientific notation for very small or
/// large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e7).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// JSON number, or a string for infinities and NaN.
fn json_num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn lambda_grid_json(grid: &[LambdaVector]) -> Value {
    Value::from(grid.iter().map(|l| l.values().to_vec()).collect::<Vec<_>>())
}

// ---------------------------------------------------------------- toy-curve

fn toy_curve(cfg: &ConfigMap, out: &Path) -> Result<Outcome, CliError> {
    let toy = toy_config(cfg)?;
    let curve = error_curve(&toy)?;

    let csv_path = out.join("error_curve.csv");
    write_with(&csv_path, |w| write_error_curve(&curve, toy.order, w))?;
    write_text(&out.join("error_curve.svg"), &error_curve_chart(&curve).render())?;

    let failed = curve.failed_cells();
    let deferred = over_budget(failed, curve.rows.len())
        .then(|| CliError::Numerical(format!("{failed} of {} error-curve cells failed", curve.rows.len())));
    let aggregation = match toy.aggregation {
        ToyAggregation::Training => json!("training"),
        ToyAggregation::HeldOut { samples } => json!({ "heldout": samples }),
    };
    Ok(Outcome {
        resolved: json!({
            "seed": toy.seed,
            "n_max": toy.n_max,
            "order": toy.order,
            "grid_nodes": toy.grid_nodes,
            "noise_sigma": toy.noise_sigma,
            "aggregation": aggregation,
            "lambda_grid": lambda_grid_json(&toy.lambda_grid),
            "failed_cells": failed,
        }),
        outputs: vec!["error_curve.csv".into(), "error_curve.svg".into()],
        deferred,
    })
}

pub fn write_error_curve(curve: &ErrorCurve, order: usize, w: impl Write) -> polyfreg::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["N".to_string()];
    header.extend((0..=order).map(|k| format!("lambda{k}")));
    header.push("error".into());
    csv.write_record(&header)?;
    for row in &curve.rows {
        let mut rec = vec![row.n.to_string()];
        match row.model {
            CurveModel::Lambda(idx) => rec.extend(curve.lambda_grid[idx].values().iter().map(|v| format!("{v:e}"))),
            CurveModel::Aggregate => rec.extend((0..=order).map(|_| "AGG".to_string())),
        }
        rec.push(num(row.error));
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

fn error_curve_chart(curve: &ErrorCurve) -> LineChart {
    let mut series: Vec<Series> = curve
        .lambda_grid
        .iter()
        .enumerate()
        .map(|(idx, lambda)| Series {
            label: format!("λ = {}", lambda_label(lambda)),
            points: curve
                .rows
                .iter()
                .filter(|r| r.model == CurveModel::Lambda(idx))
                .map(|r| (r.n as f64, r.error))
                .collect(),
            bold: false,
        })
        .collect();
    series.push(Series {
        label: "AGG".into(),
        points: curve
            .rows
            .iter()
            .filter(|r| r.model == CurveModel::Aggregate)
            .map(|r| (r.n as f64, r.error))
            .collect(),
        bold: true,
    });
    LineChart {
        title: "Model error versus sample size".into(),
        x_label: "N".into(),
        y_label: "L2 error".into(),
        series,
        reference_lines: vec![ReferenceLine {
            y: std::f64::consts::PI,
            label: "3.14".into(),
        }],
        log_y: true,
        legend: true,
        ..LineChart::default()
    }
}

// ---------------------------------------------------------------- data

fn read_labeled(path: &Path, grid: Grid) -> Result<Dataset, CliError> {
    let table = read_profiles(open(path)?, &grid)?;
    Ok(table.into_dataset(Arc::new(grid))?)
}

/// `--data`, or the synthetic surrogate when requested.
fn load_dataset(cfg: &ConfigMap, common: &CommonArgs) -> Result<(Dataset, Value), CliError> {
    if cfg.get_bool("evaluate.synthetic_surrogate")? {
        let sc = surrogate_config(cfg)?;
        let ds = synthetic_stenosis(&sc)?;
        let source = json!({
            "synthetic_surrogate": {
                "seed": sc.seed,
                "n_negative": sc.n_negative,
                "n_positive": sc.n_positive,
                "interval_mm": sc.interval_mm,
                "grid_nodes": sc.grid_nodes,
                "points_per_profile": sc.points_per_profile,
            }
        });
        return Ok((ds, source));
    }
    let path = common
        .data
        .as_ref()
        .ok_or_else(|| CliError::Config("no dataset: pass --data PATH or --synthetic-surrogate".into()))?;
    let grid = data_grid(cfg)?;
    let source = json!({
        "data": path.display().to_string(),
        "grid": { "lower": grid.lower(), "upper": grid.upper(), "nodes": grid.len() },
    });
    Ok((read_labeled(path, grid)?, source))
}

/// Order and λ grid for `fit`/`aggregate`; same defaults as `evaluate`.
fn model_family(cfg: &ConfigMap) -> Result<(usize, Vec<LambdaVector>), CliError> {
    let e = eval_config(cfg)?;
    Ok((e.order, e.lambda_grid))
}

// ---------------------------------------------------------------- fit

struct FittedFamily {
    /// `(λ index, model)` for every successful fit.
    models: Vec<(usize, PolyModel)>,
    lambda_grid: Vec<LambdaVector>,
    order: usize,
    source: Value,
    dir: PathBuf,
}

fn fit_family(cfg: &ConfigMap, common: &CommonArgs) -> Result<FittedFamily, CliError> {
    let (order, lambda_grid) = model_family(cfg)?;
    let (data, source) = load_dataset(cfg, common)?;
    let data = Arc::new(data);
    let g = gram(&data);
    let fits: Vec<_> = lambda_grid
        .par_iter()
        .map(|lambda| fit_with_gram(data.clone(), &g, lambda))
        .collect();

    let dir = common.out.join(MODELS_SUBDIR);
    fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    write_with(&dir.join(TRAINING_FILE), |w| write_wide(&data, w))?;

    let mut models = Vec::new();
    let mut report = Vec::new();
    for (idx, (lambda, fitted)) in lambda_grid.iter().zip(fits).enumerate() {
        let mut rec = vec![idx.to_string()];
        rec.extend(lambda.values().iter().map(|v| format!("{v:e}")));
        match fitted {
            Ok(model) => {
                let fitted_values = model.representer().fitted_values(&g);
                let risk = empirical_risk(&fitted_values, data.responses())?;
                rec.extend([
                    num(risk),
                    num(model.residual_norm()),
                    num(model.condition()),
                    format!("{:?}", model.solve_method()),
                ]);
                write_with(&dir.join(format!("model_{idx:03}.csv")), |w| {
                    write_model_csv(model.representer(), w)
                })?;
                write_with(&dir.join(format!("model_{idx:03}.meta.json")), |w| {
                    write_model_meta(&ModelMeta::of(&model, TRAINING_FILE), w)
                })?;
                models.push((idx, model));
            }
            Err(e) => rec.extend(["NaN".into(), "NaN".into(), "NaN".into(), format!("failed: {e}")]),
        }
        report.push(rec);
    }

    let mut header = vec!["model_index".to_string()];
    header.extend((0..=order).map(|k| format!("lambda{k}")));
    header.extend(["train_risk", "residual_norm", "condition", "solve_method"].map(String::from));
    write_with(&common.out.join("fit_report.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&header)?;
        for rec in &report {
            csv.write_record(rec)?;
        }
        csv.flush()?;
        Ok(())
    })?;

    Ok(FittedFamily {
        models,
        lambda_grid,
        order,
        source,
        dir,
    })
}

fn fit_command(cfg: &ConfigMap, common: &CommonArgs) -> Result<Outcome, CliError> {
    let family = fit_family(cfg, common)?;
    let failed = family.lambda_grid.len() - family.models.len();
    let deferred = over_budget(failed, family.lambda_grid.len())
        .then(|| CliError::Numerical(format!("{failed} of {} fits failed", family.lambda_grid.len())));
    Ok(Outcome {
        resolved: json!({
            "order": family.order,
            "lambda_grid": lambda_grid_json(&family.lambda_grid),
            "source": family.source,
            "failed_fits": failed,
        }),
        outputs: vec!["fit_report.csv".into(), format!("{MODELS_SUBDIR}/")],
        deferred,
    })
}

// ---------------------------------------------------------------- stored models

/// Models of a directory written by `fit`, ordered by λ index.
fn load_models(dir: &Path) -> Result<Vec<(usize, PolyModel)>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Config(format!("cannot read {}: {e}", dir.display())))?;
    let mut indexed: Vec<(usize, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::Config(e.to_string()))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(idx) = name
            .strip_prefix("model_")
            .and_then(|rest| rest.strip_suffix(".meta.json"))
            .and_then(|digits| digits.parse::<usize>().ok())
        {
            indexed.push((idx, path));
        }
    }
    if indexed.is_empty() {
        return Err(CliError::Config(format!("no models found in {}", dir.display())));
    }
    indexed.sort();

    let mut training: BTreeMap<(String, usize), Arc<Dataset>> = BTreeMap::new();
    let mut models = Vec::with_capacity(indexed.len());
    for (idx, meta_path) in indexed {
        let meta = read_model_meta(open(&meta_path)?)?;
        let key = (meta.training_file.clone(), meta.grid.nodes);
        let data = match training.get(&key) {
            Some(d) => d.clone(),
            None => {
                let d = Arc::new(read_labeled(&dir.join(&meta.training_file), meta.grid.build()?)?);
                training.insert(key, d.clone());
                d
            }
        };
        let model = load_model(open(&dir.join(format!("model_{idx:03}.csv")))?, &meta, data)?;
        models.push((idx, model));
    }
    Ok(models)
}

/// Aggregation weights keyed by model index, if `aggregate` was run on `dir`.
fn load_weights(dir: &Path) -> Result<Option<Vec<(usize, f64)>>, CliError> {
    let path = dir.join(AGGREGATE_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let mut rdr = csv::Reader::from_reader(open(&path)?);
    let mut weights = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(polyfreg::Error::from)?;
        let parse = |i: usize| rec.get(i).map(str::trim).unwrap_or("");
        let idx = parse(0)
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("bad model index in {}", path.display())))?;
        let c = parse(1)
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("bad weight in {}", path.display())))?;
        weights.push((idx, c));
    }
    Ok(Some(weights))
}

// ---------------------------------------------------------------- aggregate

fn aggregate_command(cfg: &ConfigMap, common: &CommonArgs) -> Result<Outcome, CliError> {
    let (indexed, dir, source) = match &common.model_dir {
        Some(dir) => (
            load_models(dir)?,
            dir.clone(),
            json!({ "model_dir": dir.display().to_string() }),
        ),
        None => {
            let family = fit_family(cfg, common)?;
            (family.models, family.dir, family.source)
        }
    };
    if indexed.is_empty() {
        return Err(CliError::Numerical("every fit failed; nothing to aggregate".into()));
    }
    let order = indexed[0].1.order();

    // Stored models aggregate on --data when given, otherwise on their own
    // training set.
    let agg_data: Arc<Dataset> = match (&common.model_dir, &common.data) {
        (Some(_), Some(path)) => {
            let grid = indexed[0].1.training().grid().clone();
            Arc::new(read_labeled(path, grid)?)
        }
        _ => indexed[0].1.training().clone(),
    };
    let (indices, models): (Vec<usize>, Vec<PolyModel>) = indexed.into_iter().unzip();
    let risks: Vec<f64> = models
        .par_iter()
        .map(|m| {
            let p = predict_many(m, agg_data.samples())?;
            empirical_risk(&p, agg_data.responses())
        })
        .collect::<polyfreg::Result<_>>()?;
    let agg: AggregatedModel = aggregate(models, &agg_data)?;
    let agg_pred = polyfreg::aggregation::predict_aggregated_many(&agg, agg_data.samples())?;
    let agg_risk = empirical_risk(&agg_pred, agg_data.responses())?;

    write_with(&dir.join(AGGREGATE_FILE), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["model_index", "c_tilde"])?;
        for (idx, c) in indices.iter().zip(agg.coefficients()) {
            csv.write_record([idx.to_string(), format_exact(*c)])?;
        }
        csv.flush()?;
        Ok(())
    })?;

    write_with(&common.out.join("aggregation_report.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["model_index".to_string()];
        header.extend((0..=order).map(|k| format!("lambda{k}")));
        header.extend(["c_tilde".to_string(), "train_risk".to_string()]);
        csv.write_record(&header)?;
        for (k, (idx, m)) in indices.iter().zip(agg.base_models()).enumerate() {
            let mut rec = vec![idx.to_string()];
            rec.extend(m.lambda().values().iter().map(|v| format!("{v:e}")));
            rec.push(num(agg.coefficients()[k]));
            rec.push(num(risks[k]));
            csv.write_record(&rec)?;
        }
        let mut footer = vec!["AGG".to_string()];
        footer.extend((0..=order).map(|_| "AGG".to_string()));
        footer.push(num(agg.coefficients().iter().sum::<f64>()));
        footer.push(num(agg_risk));
        csv.write_record(&footer)?;
        csv.flush()?;
        Ok(())
    })?;

    let diagnostics = json!({
        "condition": json_num(agg.gram_tilde_condition()),
        "ridge_used": agg.ridge_used(),
        "n_models": indices.len(),
        "n_samples": agg_data.len(),
        "aggregate_train_risk": agg_risk,
        "best_single_train_risk": risks.iter().cloned().fold(f64::INFINITY, f64::min),
    });
    write_with(&common.out.join("aggregation_diagnostics.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &diagnostics)?;
        writeln!(w)?;
        Ok(())
    })?;

    Ok(Outcome {
        resolved: json!({
            "order": order,
            "source": source,
            "models": indices,
            "weights_file": dir.join(AGGREGATE_FILE).display().to_string(),
        }),
        outputs: vec!["aggregation_report.csv".into(), "aggregation_diagnostics.json".into()],
        deferred: None,
    })
}

// ---------------------------------------------------------------- predict

fn predict_command(common: &CommonArgs) -> Result<Outcome, CliError> {
    let dir = common
        .model_dir
        .as_ref()
        .ok_or_else(|| CliError::Config("predict needs --model-dir".into()))?;
    let input = common
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("predict needs --input PATH".into()))?;
    let indexed = load_models(dir)?;
    let grid = indexed[0].1.training().grid().clone();
    let table = read_profiles(open(input)?, &grid)?;
    let inputs = table.into_unlabeled(Arc::new(grid))?;

    let columns: Vec<Vec<f64>> = indexed
        .par_iter()
        .map(|(_, m)| predict_many(m, inputs.samples()))
        .collect::<polyfreg::Result<_>>()?;

    let aggregate_column = match load_weights(dir)? {
        None => None,
        Some(weights) => {
            let mut acc = vec![0.0; inputs.len()];
            for (idx, c) in &weights {
                let pos = indexed
                    .iter()
                    .position(|(i, _)| i == idx)
                    .ok_or_else(|| CliError::Data(format!("aggregate weight for missing model {idx}")))?;
                for (a, v) in acc.iter_mut().zip(&columns[pos]) {
                    *a += c * v;
                }
            }
            Some(acc)
        }
    };

    write_with(&common.out.join("predictions.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string()];
        header.extend(indexed.iter().map(|(idx, _)| format!("model_{idx:03}")));
        if aggregate_column.is_some() {
            header.push("AGG".into());
        }
        csv.write_record(&header)?;
        for (row, s) in inputs.samples().iter().enumerate() {
            let mut rec = vec![s.id.to_string()];
            rec.extend(columns.iter().map(|c| num(c[row])));
            if let Some(agg) = &aggregate_column {
                rec.push(num(agg[row]));
            }
            csv.write_record(&rec)?;
        }
        csv.flush()?;
        Ok(())
    })?;

    Ok(Outcome {
        resolved: json!({
            "model_dir": dir.display().to_string(),
            "input": input.display().to_string(),
            "models": indexed.iter().map(|(i, _)| *i).collect::<Vec<_>>(),
            "aggregate": aggregate_column.is_some(),
        }),
        outputs: vec!["predictions.csv".into()],
        deferred: None,
    })
}

// ---------------------------------------------------------------- evaluate

fn evaluate_command(cfg: &ConfigMap, common: &CommonArgs) -> Result<Outcome, CliError> {
    let eval = eval_config(cfg)?;
    let (dataset, source) = load_dataset(cfg, common)?;
    let summary = evaluate_runs(&dataset, &eval)?;

    write_with(&common.out.join("metrics.csv"), |w| write_metrics(&summary, w))?;
    let roc_name = format!("roc_p{}.svg", eval.order);
    write_text(&common.out.join(&roc_name), &roc_chart(&summary, eval.order).render())?;

    let cells = summary.reports.len() * (summary.lambda_grid.len() + 1);
    let failed: usize = summary
        .reports
        .iter()
        .map(|r| r.per_model.iter().filter(|m| m.is_none()).count() + usize::from(r.aggregated.is_none()))
        .sum();
    let deferred =
        over_budget(failed, cells).then(|| CliError::Numerical(format!("{failed} of {cells} evaluations failed")));

    Ok(Outcome {
        resolved: json!({
            "order": eval.order,
            "lambda_grid": lambda_grid_json(&eval.lambda_grid),
            "threshold": eval.threshold,
            "runs": eval.runs,
            "seed": eval.seed,
            "train_pos": eval.train_pos,
            "train_neg": eval.train_neg,
            "source": source,
            "failed_evaluations": failed,
        }),
        outputs: vec!["metrics.csv".into(), roc_name],
        deferred,
    })
}

pub fn write_metrics(summary: &EvaluationSummary, w: impl Write) -> polyfreg::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["model", "SE", "SP", "AUC"])?;
    let row = |label: String, m: &MetricsMean| vec![label, num(m.sensitivity), num(m.specificity), num(m.auc)];
    for (lambda, m) in summary.lambda_grid.iter().zip(&summary.per_model) {
        csv.write_record(row(lambda_label(lambda), m))?;
    }
    csv.write_record(row("AGG".into(), &summary.aggregated))?;
    csv.flush()?;
    Ok(())
}

/// ROC curves of the first run, one per λ plus the aggregate.
fn roc_chart(summary: &EvaluationSummary, order: usize) -> LineChart {
    let first = &summary.reports[0];
    let mut series: Vec<Series> = summary
        .lambda_grid
        .iter()
        .zip(&first.per_model)
        .filter_map(|(lambda, m)| {
            m.as_ref().map(|m| Series {
                label: format!("λ = {}", lambda_label(lambda)),
                points: m.roc_points.clone(),
                bold: false,
            })
        })
        .collect();
    if let Some(agg) = &first.aggregated {
        series.push(Series {
            label: "AGG".into(),
            points: agg.roc_points.clone(),
            bold: true,
        });
    }
    LineChart {
        title: format!("ROC, polynomial order {order} (run 1 of {})", summary.reports.len()),
        x_label: "1 - specificity".into(),
        y_label: "sensitivity".into(),
        series,
        x_range: Some((0.0, 1.0)),
        y_range: Some((0.0, 1.0)),
        legend: true,
        ..LineChart::default()
    }
}
