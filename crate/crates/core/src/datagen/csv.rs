//! Semicolon-separated dataset files.
//!
//! ```text
//! dim=4;mode=PAIRED;seed=7
//! a1;a2;a3;a4;b1;b2;b3;b4;maj_ab;maj_ba
//! ```
//!
//! Numbers are positional decimals with 17 significant digits, which is enough
//! for every `f64` to survive the round trip. Labels are `0` or `1`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Dataset, DatasetRow, SamplingMode};
use crate::error::{Error, Result};
use crate::majorization::ProbVector;

/// Formats `x` as a positional decimal with 17 significant digits.
pub(crate) fn format_sig17(x: f64) -> String {
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{digits}")
    } else {
        let split = (exp + 1) as usize;
        if split >= digits.len() {
            let zeros = "0".repeat(split - digits.len());
            format!("{sign}{digits}{zeros}")
        } else {
            format!("{sign}{}.{}", &digits[..split], &digits[split..])
        }
    }
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv_to(ds, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(ds: &Dataset, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "dim={};mode={};seed={}", ds.dim, ds.mode.as_str(), ds.seed)?;
    let mut line = String::new();
    for row in &ds.rows {
        line.clear();
        for x in row.alpha.entries().iter().chain(row.beta.entries()) {
            line.push_str(&format_sig17(*x));
            line.push(';');
        }
        line.push(if row.maj_ab { '1' } else { '0' });
        line.push(';');
        line.push(if row.maj_ba { '1' } else { '0' });
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file)
}

fn parse_header(line: &str) -> Result<(usize, SamplingMode, u64)> {
    let malformed = |reason: String| Error::MalformedRow { line: 1, reason };
    let mut dim = None;
    let mut mode = None;
    let mut seed = None;
    for field in line.trim().split(';') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| malformed(format!("header field {field:?} is not key=value")))?;
        match key {
            "dim" => dim = value.parse::<usize>().ok(),
            "mode" => mode = value.parse::<SamplingMode>().ok(),
            "seed" => seed = value.parse::<u64>().ok(),
            _ => return Err(malformed(format!("unknown header key {key:?}"))),
        }
    }
    match (dim, mode, seed) {
        (Some(d), Some(m), Some(s)) if d > 0 => Ok((d, m, s)),
        _ => Err(malformed(format!("bad header {line:?}"))),
    }
}

fn parse_label(field: &str, line: usize) -> Result<bool> {
    match field.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::MalformedRow {
            line,
            reason: format!("label {other:?} is not 0 or 1"),
        }),
    }
}

pub fn read_csv_from<R: Read>(reader: R) -> Result<Dataset> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io("<dataset>", e))?,
        None => {
            return Err(Error::MalformedRow {
                line: 1,
                reason: "missing header".into(),
            })
        }
    };
    let (dim, mode, seed) = parse_header(&header)?;
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.map_err(|e| Error::io("<dataset>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(';').collect();
        if !fields.len().is_multiple_of(2) || fields.len() < 4 {
            return Err(Error::MalformedRow {
                line: line_no,
                reason: format!("{} fields for dimension {dim}", fields.len()),
            });
        }
        let found = (fields.len() - 2) / 2;
        if found != dim {
            return Err(Error::DimInconsistent {
                line: line_no,
                expected: dim,
                found,
            });
        }
        let numbers = fields[..2 * dim]
            .iter()
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::MalformedRow {
                    line: line_no,
                    reason: format!("non-numeric entry {f:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let vector = |xs: &[f64]| {
            ProbVector::new(xs.to_vec()).map_err(|e| Error::MalformedRow {
                line: line_no,
                reason: e.to_string(),
            })
        };
        rows.push(DatasetRow {
            alpha: vector(&numbers[..dim])?,
            beta: vector(&numbers[dim..])?,
            maj_ab: parse_label(fields[2 * dim], line_no)?,
            maj_ba: parse_label(fields[2 * dim + 1], line_no)?,
        });
    }
    Dataset::new(dim, rows, seed, mode)
}
