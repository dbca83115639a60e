//! CSV and JSON file formats.
//!
//! * Raw profiles: `id,position_mm,diameter_mm`, optionally with a `label`
//!   column repeated on every row of a profile.
//! * Pre-gridded samples: `id,label,v_1,…,v_G` (the `label` column is
//!   optional).
//! * Models: `kind,degree,index,value` rows plus a JSON metadata sidecar.
//!
//! Floats are written with 17 significant digits so they read back bit-exact.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcdata::{ingest_profile, Dataset, FunctionalSample, Grid};
use crate::mp_solver::{LambdaVector, PolyModel, Representer};

/// Decimal with 17 significant digits.
pub fn format_exact(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} `{field}`")))
}

/// Predictors read from a CSV file, with labels when the file has them.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    pub samples: Vec<FunctionalSample>,
    pub labels: Option<Vec<f64>>,
}

impl ProfileTable {
    /// Labeled dataset; fails if the file had no labels.
    pub fn into_dataset(self, grid: Arc<Grid>) -> Result<Dataset> {
        let labels = self
            .labels
            .ok_or_else(|| Error::Parse("data has no `label` column".into()))?;
        Dataset::new(grid, self.samples, labels)
    }

    /// Dataset with zero responses, for prediction inputs.
    pub fn into_unlabeled(self, grid: Arc<Grid>) -> Result<Dataset> {
        let n = self.samples.len();
        Dataset::new(grid, self.samples, vec![0.0; n])
    }
}

/// Reads either CSV layout, resampling raw profiles onto `grid`. Wide files
/// must have exactly one value column per grid node.
pub fn read_profiles(reader: impl Read, grid: &Grid) -> Result<ProfileTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("id").ok_or_else(|| Error::Parse("missing `id` column".into()))?;
    let label_col = col("label");
    match (col("position_mm"), col("diameter_mm")) {
        (Some(pos_col), Some(val_col)) => read_long(rdr, grid, id_col, label_col, pos_col, val_col),
        _ => read_wide(rdr, grid, &headers, id_col, label_col),
    }
}

fn parse_id(field: &str) -> Result<i64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad id `{field}`")))
}

fn read_long(
    mut rdr: csv::Reader<impl Read>,
    grid: &Grid,
    id_col: usize,
    label_col: Option<usize>,
    pos_col: usize,
    val_col: usize,
) -> Result<ProfileTable> {
    struct Raw {
        id: i64,
        label: Option<f64>,
        positions: Vec<f64>,
        values: Vec<f64>,
    }
    let mut order: Vec<Raw> = Vec::new();
    let mut index: HashMap<i64, usize> = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let id = parse_id(&record[id_col])?;
        let label = label_col.map(|c| parse_f64(&record[c], "label")).transpose()?;
        let slot = *index.entry(id).or_insert_with(|| {
            order.push(Raw {
                id,
                label,
                positions: Vec::new(),
                values: Vec::new(),
            });
            order.len() - 1
        });
        let raw = &mut order[slot];
        if raw.label != label {
            return Err(Error::Parse(format!("profile {id} has inconsistent labels")));
        }
        raw.positions.push(parse_f64(&record[pos_col], "position")?);
        raw.values.push(parse_f64(&record[val_col], "diameter")?);
    }
    if order.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let samples = order
        .iter()
        .map(|r| Ok(ingest_profile(&r.positions, &r.values, grid)?.with_id(r.id)))
        .collect::<Result<Vec<_>>>()?;
    let labels = label_col.map(|_| order.iter().map(|r| r.label.unwrap_or(0.0)).collect());
    Ok(ProfileTable { samples, labels })
}

fn read_wide(
    mut rdr: csv::Reader<impl Read>,
    grid: &Grid,
    headers: &csv::StringRecord,
    id_col: usize,
    label_col: Option<usize>,
) -> Result<ProfileTable> {
    let value_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != id_col && Some(c) != label_col)
        .collect();
    if value_cols.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: value_cols.len(),
        });
    }
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let id = parse_id(&record[id_col])?;
        if let Some(c) = label_col {
            labels.push(parse_f64(&record[c], "label")?);
        }
        let values = value_cols
            .iter()
            .map(|&c| parse_f64(&record[c], "value"))
            .collect::<Result<Vec<_>>>()?;
        samples.push(FunctionalSample::new(id, values)?);
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(ProfileTable {
        samples,
        labels: label_col.map(|_| labels),
    })
}

/// Writes `id,label,v_1,…,v_G` with exact decimals.
pub fn write_wide(dataset: &Dataset, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend((1..=dataset.grid().len()).map(|k| format!("v_{k}")));
    w.write_record(&header)?;
    for (s, y) in dataset.samples().iter().zip(dataset.responses()) {
        let mut row = vec![s.id.to_string(), format_exact(*y)];
        row.extend(s.values().iter().map(|v| format_exact(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `kind,degree,index,value` rows: one `intercept,0,0,b0`, then
/// `coeff,l,i,b_li` in degree-major order.
pub fn write_model_csv(rep: &Representer, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["kind", "degree", "index", "value"])?;
    w.write_record(["intercept", "0", "0", &format_exact(rep.intercept)])?;
    for l in 1..=rep.order() {
        for i in 0..rep.n_samples() {
            w.write_record([
                "coeff".to_string(),
                l.to_string(),
                i.to_string(),
                format_exact(rep.coeff(l, i)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_model_csv(reader: impl Read, order: usize, n_samples: usize) -> Result<Representer> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rep = Representer::zero(order, n_samples);
    let mut seen_intercept = false;
    let mut seen = vec![false; order * n_samples];
    for record in rdr.records() {
        let record = record?;
        if record.len() != 4 {
            return Err(Error::Parse("model rows need 4 fields".into()));
        }
        let degree: usize = record[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad degree `{}`", &record[1])))?;
        let index: usize = record[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad index `{}`", &record[2])))?;
        let value = parse_f64(&record[3], "coefficient")?;
        match &record[0] {
            "intercept" => {
                rep.intercept = value;
                seen_intercept = true;
            }
            "coeff" => {
                if degree == 0 || degree > order || index >= n_samples {
                    return Err(Error::Parse(format!("coefficient ({degree}, {index}) out of range")));
                }
                rep.coeffs[(degree - 1, index)] = value;
                seen[(degree - 1) * n_samples + index] = true;
            }
            other => return Err(Error::Parse(format!("unknown row kind `{other}`"))),
        }
    }
    if !seen_intercept || seen.iter().any(|s| !s) {
        return Err(Error::Parse("model file is missing coefficients".into()));
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: f64,
    pub upper: f64,
    pub nodes: usize,
}

impl GridSpec {
    pub fn of(grid: &Grid) -> Self {
        Self {
            lower: grid.lower(),
            upper: grid.upper(),
            nodes: grid.len(),
        }
    }

    pub fn build(&self) -> Result<Grid> {
        Grid::uniform(self.lower, self.upper, self.nodes)
    }
}

/// Sidecar describing a stored model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub order: usize,
    pub lambda: LambdaVector,
    pub n_samples: usize,
    pub grid: GridSpec,
    /// Wide CSV of the training inputs, relative to the sidecar.
    pub training_file: String,
    pub residual_norm: f64,
}

impl ModelMeta {
    pub fn of(model: &PolyModel, training_file: impl Into<String>) -> Self {
        Self {
            order: model.order(),
            lambda: model.lambda().clone(),
            n_samples: model.training().len(),
            grid: GridSpec::of(model.training().grid()),
            training_file: training_file.into(),
            residual_norm: model.residual_norm(),
        }
    }
}

pub fn write_model_meta(meta: &ModelMeta, writer: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(writer, meta)?;
    Ok(())
}

pub fn read_model_meta(reader: impl Read) -> Result<ModelMeta> {
    Ok(serde_json::from_reader(reader)?)
}

/// Rebuilds a model from its coefficient file, sidecar, and training data.
pub fn load_model(coeffs: impl Read, meta: &ModelMeta, training: Arc<Dataset>) -> Result<PolyModel> {
    if training.len() != meta.n_samples {
        return Err(Error::LengthMismatch {
            expected: meta.n_samples,
            found: training.len(),
        });
    }
    if GridSpec::of(training.grid()) != meta.grid {
        return Err(Error::GridMismatch);
    }
    let rep = read_model_csv(coeffs, meta.order, meta.n_samples)?;
    PolyModel::from_parts(rep, meta.lambda.clone(), training)
}
