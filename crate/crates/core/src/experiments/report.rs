//! Report persistence: versioned JSON, flattened CSV and per-figure data files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::stats::mean;
use super::{HybridReport, RunReport, TransferReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

/// A report with a flat tabular view.
pub trait Report: Serialize + DeserializeOwned {
    const CSV_HEADER: &'static str;

    fn csv_rows(&self) -> Vec<String>;

    fn to_csv_string(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in self.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}

impl Report for RunReport {
    const CSV_HEADER: &'static str = "dim,optimizer,seed,epoch,train_loss,test_accuracy,\
train_duration_s,test_duration_s,dataset_seed,model_checksum";

    fn csv_rows(&self) -> Vec<String> {
        self.runs
            .iter()
            .flat_map(|r| {
                r.curve.iter().map(move |e| {
                    format!(
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.dim,
                        r.optimizer,
                        r.seed,
                        e.epoch,
                        e.train_loss,
                        e.test_accuracy,
                        r.train_duration_s,
                        r.test_duration_s,
                        r.seeds.dataset,
                        r.model_checksum
                    )
                })
            })
            .collect()
    }
}

impl Report for TransferReport {
    const CSV_HEADER: &'static str = "base_dim,product_dim,optimizer,seed,native_accuracy,\
transfer_accuracy,delta,tp,fp,tn,fn,eval_rows,train_duration_s,eval_duration_s,model_checksum";

    fn csv_rows(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| {
                let c = r.confusion;
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.base_dim,
                    r.product_dim,
                    r.optimizer,
                    r.seed,
                    r.native_accuracy,
                    r.transfer_accuracy,
                    r.delta,
                    c.tp,
                    c.fp,
                    c.tn,
                    c.fn_,
                    r.eval_rows,
                    r.train_duration_s,
                    r.eval_duration_s,
                    r.model_checksum
                )
            })
            .collect()
    }
}

impl Report for HybridReport {
    const CSV_HEADER: &'static str = "seed,strategy,input,filtered,passed,stage1_accuracy,\
stage2_accuracy,end_to_end_accuracy,agreement_rate,stage1_wall_s,stage2_wall_s,total_wall_s";

    fn csv_rows(&self) -> Vec<String> {
        self.per_seed
            .iter()
            .flat_map(|seed| {
                seed.strategies.iter().map(move |s| {
                    format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{}",
                        seed.seed,
                        s.strategy,
                        s.input,
                        s.filtered,
                        s.passed,
                        s.stage1_accuracy,
                        s.stage2_accuracy.map(|a| a.to_string()).unwrap_or_default(),
                        s.end_to_end_accuracy,
                        seed.agreement_rate,
                        s.stage1_wall_s,
                        s.stage2_wall_s,
                        s.total_wall_s
                    )
                })
            })
            .collect()
    }
}

pub fn export_report<R: Report>(report: &R, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Json => serde_json::to_string_pretty(report)?,
        ReportFormat::Csv => report.to_csv_string(),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_report<R: Report>(path: impl AsRef<Path>) -> Result<R> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_file(dir: &Path, name: String, body: String, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes plot-ready files into `dir`:
///
/// - `accuracy_<optimizer>_d<dim>.csv`: epoch against seed-mean test accuracy
/// - `boxplot_<optimizer>.csv`: per-epoch five-number summary across dimensions
/// - `time_<optimizer>.csv`: dimension against seed-mean training seconds
pub fn write_figure_csvs(report: &RunReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let mut curves: BTreeMap<(String, usize), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in &report.runs {
        for e in &r.curve {
            curves
                .entry((r.optimizer.to_string(), r.dim))
                .or_default()
                .entry(e.epoch)
                .or_default()
                .push(e.test_accuracy);
        }
    }
    for ((opt, dim), by_epoch) in curves {
        let mut body = String::from("epoch,accuracy\n");
        for (epoch, accs) in by_epoch {
            let _ = writeln!(body, "{epoch},{}", mean(&accs).unwrap_or(f64::NAN));
        }
        write_file(dir, format!("accuracy_{opt}_d{dim}.csv"), body, &mut written)?;
    }

    let mut boxes: BTreeMap<String, String> = BTreeMap::new();
    for d in &report.dispersion {
        let body = boxes
            .entry(d.optimizer.to_string())
            .or_insert_with(|| String::from("epoch,min,q1,median,q3,max\n"));
        let a = d.accuracy;
        let _ = writeln!(body, "{},{},{},{},{},{}", d.epoch, a.min, a.q1, a.median, a.q3, a.max);
    }
    for (opt, body) in boxes {
        write_file(dir, format!("boxplot_{opt}.csv"), body, &mut written)?;
    }

    for &opt in &report.spec.optimizers {
        let mut body = String::from("dim,train_seconds\n");
        for (dim, t) in report.mean_train_time_by_dim(opt) {
            let _ = writeln!(body, "{dim},{t}");
        }
        write_file(dir, format!("time_{opt}.csv"), body, &mut written)?;
    }
    Ok(written)
}
