//! Synthetic vessel diameter profiles standing in for clinical data.
//!
//! Each profile is a tapering base diameter with a few smooth bumps and
//! measurement jitter; positive cases carry a localized Gaussian narrowing
//! whose relative depth grows with the severity label. This is NOT clinical
//! data and carries no diagnostic meaning.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{task_rng, SURROGATE_STREAM};
use crate::error::Result;
use crate::funcdata::{ingest_profile, Dataset, Grid};

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConfig {
    pub seed: u64,
    pub n_negative: usize,
    pub n_positive: usize,
    /// Truncation length of the common interval `[0, b]`, in mm.
    pub interval_mm: f64,
    pub grid_nodes: usize,
    /// Measurement points per raw profile.
    pub points_per_profile: usize,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_negative: 33,
            n_positive: 7,
            interval_mm: 140.0,
            grid_nodes: 256,
            points_per_profile: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawProfile {
    pub id: i64,
    pub label: f64,
    pub positions: Vec<f64>,
    pub diameters: Vec<f64>,
}

fn severity_labels(n_positive: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let scale = [0.25, 0.5, 0.75, 1.0];
    let mut labels: Vec<f64> = (0..n_positive).map(|k| scale[k % scale.len()]).collect();
    labels.shuffle(rng);
    labels
}

fn raw_profile(id: i64, label: f64, cfg: &SurrogateConfig, rng: &mut ChaCha8Rng) -> RawProfile {
    let length = cfg.interval_mm * rng.random_range(1.05..1.5);
    let n = cfg.points_per_profile.max(2);
    let step = length / (n - 1) as f64;
    let positions: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                0.0
            } else if k == n - 1 {
                length
            } else {
                (k as f64 + rng.random_range(-0.3..0.3)) * step
            }
        })
        .collect();

    let base = rng.random_range(4.8..5.8);
    let taper = rng.random_range(0.0..0.006);
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(-0.25..0.25),
                rng.random_range(0.0..length),
                rng.random_range(8.0..25.0),
            )
        })
        .collect();
    let narrowing = (label > 0.0).then(|| {
        let depth = 0.15 + 0.55 * label;
        let centre = rng.random_range(15.0..cfg.interval_mm - 15.0);
        let width = rng.random_range(5.0..15.0);
        (depth, centre, width)
    });
    let wobble_phase = rng.random_range(0.0..2.0 * PI);
    let jitter = Normal::new(0.0, 0.04).expect("positive sigma");

    let diameters = positions
        .iter()
        .map(|&t| {
            let mut d = base - taper * t + 0.05 * (t / 30.0 + wobble_phase).sin();
            for &(amp, centre, width) in &bumps {
                d += amp * (-((t - centre) / width).powi(2)).exp();
            }
            if let Some((depth, centre, width)) = narrowing {
                d *= 1.0 - depth * (-((t - centre) / width).powi(2)).exp();
            }
            (d + jitter.sample(rng)).max(0.2)
        })
        .collect();
    RawProfile {
        id,
        label,
        positions,
        diameters,
    }
}

/// Raw profiles: negatives first, then positives, ids `0..n`.
pub fn synthetic_profiles(cfg: &SurrogateConfig) -> Vec<RawProfile> {
    let mut label_rng = task_rng(cfg.seed, SURROGATE_STREAM, u64::MAX);
    let severities = severity_labels(cfg.n_positive, &mut label_rng);
    let labels = std::iter::repeat_n(0.0, cfg.n_negative).chain(severities);
    labels
        .enumerate()
        .map(|(i, label)| {
            let mut rng = task_rng(cfg.seed, SURROGATE_STREAM, i as u64);
            raw_profile(i as i64, label, cfg, &mut rng)
        })
        .collect()
}

/// Surrogate profiles resampled on `[0, interval_mm]`, labels as responses.
pub fn synthetic_stenosis(cfg: &SurrogateConfig) -> Result<Dataset> {
    let grid = Arc::new(Grid::uniform(0.0, cfg.interval_mm, cfg.grid_nodes)?);
    let profiles = synthetic_profiles(cfg);
    let samples = profiles
        .iter()
        .map(|p| Ok(ingest_profile(&p.positions, &p.diameters, &grid)?.with_id(p.id)))
        .collect::<Result<Vec<_>>>()?;
    let labels = profiles.iter().map(|p| p.label).collect();
    Dataset::new(grid, samples, labels)
}
