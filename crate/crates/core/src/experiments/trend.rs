//! Growth of training time with dimension.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{linear_fit, median, spearman};
use super::RunReport;
use crate::error::{Error, Result};
use crate::mlp::OptimizerKind;

pub const MIN_TREND_DIMS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrend {
    pub optimizer: OptimizerKind,
    /// `(dim, seconds)`, the seconds being the median over seeds.
    pub points: Vec<(usize, f64)>,
    pub slope_s_per_dim: f64,
    pub intercept_s: f64,
    /// `None` when either variable is constant.
    pub spearman: Option<f64>,
}

/// Least-squares slope and rank correlation of training time against
/// dimension, one entry per optimizer present in the report.
pub fn fit_time_trend(report: &RunReport) -> Result<Vec<TimeTrend>> {
    let mut table: BTreeMap<OptimizerKind, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in &report.runs {
        table
            .entry(r.optimizer)
            .or_default()
            .entry(r.dim)
            .or_default()
            .push(r.train_duration_s);
    }
    let dims = table.values().map(BTreeMap::len).min().unwrap_or(0);
    if dims < MIN_TREND_DIMS {
        return Err(Error::InsufficientPoints {
            needed: MIN_TREND_DIMS,
            got: dims,
        });
    }
    Ok(table
        .into_iter()
        .map(|(optimizer, by_dim)| {
            let points: Vec<(usize, f64)> = by_dim
                .into_iter()
                .map(|(d, t)| (d, median(&t).expect("non-empty group")))
                .collect();
            let x: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = points.iter().map(|p| p.1).collect();
            let (slope, intercept) = linear_fit(&x, &y).expect("at least four distinct dims");
            TimeTrend {
                optimizer,
                spearman: spearman(&x, &y),
                points,
                slope_s_per_dim: slope,
                intercept_s: intercept,
            }
        })
        .collect())
}
