//! Column-wise comparison of two CSV tables of the same schema.

use std::path::Path;

use crate::error::{LabError, LabResult};
use crate::output::ParsedCsv;

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDeviation {
    pub column: String,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub columns: Vec<ColumnDeviation>,
    pub tolerance: f64,
    /// True when rows were matched by interpolating B onto A's times.
    pub interpolated: bool,
}

impl CompareReport {
    pub fn failing(&self) -> Vec<&str> {
        self.columns.iter().filter(|c| !(c.max <= self.tolerance)).map(|c| c.column.as_str()).collect()
    }

    pub fn passed(&self) -> bool {
        self.failing().is_empty()
    }
}

pub fn compare_files(a: &Path, b: &Path, tolerance: f64) -> LabResult<CompareReport> {
    compare(&ParsedCsv::read(a)?, &ParsedCsv::read(b)?, tolerance)
}

/// Per-column max and mean absolute deviation of B from A. Textual
/// columns must agree exactly. With a `t` column, B is linearly
/// interpolated onto A's times when the grids differ.
pub fn compare(a: &ParsedCsv, b: &ParsedCsv, tolerance: f64) -> LabResult<CompareReport> {
    if !(tolerance >= 0.0) {
        return Err(LabError::config("tol", format!("{tolerance} must be non-negative")));
    }
    if a.schema != b.schema {
        return Err(LabError::Schema(format!("{:?} vs {:?}", a.schema, b.schema)));
    }
    if a.columns != b.columns {
        return Err(LabError::Schema(format!("columns [{}] vs [{}]", a.columns.join(","), b.columns.join(","))));
    }
    let na = numeric(a)?;
    let nb = numeric(b)?;
    let time = a.column("t");
    let same_grid = a.rows.len() == b.rows.len()
        && time.is_none_or(|j| {
            na.iter().zip(&nb).all(|(ra, rb)| match (ra[j], rb[j]) {
                (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * (1.0 + x.abs()),
                _ => false,
            })
        });
    let rows_b: Vec<Vec<Option<f64>>> = if same_grid {
        nb
    } else {
        let j = time.ok_or_else(|| LabError::Schema(format!("row counts differ ({} vs {})", a.rows.len(), b.rows.len())))?;
        interpolate(&na, &nb, j)?
    };
    let mut columns = Vec::new();
    for (c, name) in a.columns.iter().enumerate() {
        if Some(c) == time {
            continue;
        }
        let mut max = 0.0f64;
        let mut sum = 0.0;
        for (r, (ra, rb)) in na.iter().zip(&rows_b).enumerate() {
            let d = match (ra[c], rb[c]) {
                (Some(x), Some(y)) => (x - y).abs(),
                (None, None) if same_grid && a.rows[r][c] == b.rows[r][c] => 0.0,
                _ => f64::INFINITY,
            };
            max = max.max(d);
            sum += d;
        }
        let mean = if na.is_empty() { 0.0 } else { sum / na.len() as f64 };
        columns.push(ColumnDeviation { column: name.clone(), max, mean });
    }
    Ok(CompareReport { columns, tolerance, interpolated: !same_grid })
}

fn numeric(t: &ParsedCsv) -> LabResult<Vec<Vec<Option<f64>>>> {
    t.rows
        .iter()
        .map(|r| {
            if r.len() != t.columns.len() {
                return Err(LabError::Schema(format!("row has {} fields, header has {}", r.len(), t.columns.len())));
            }
            Ok(r.iter().map(|s| s.trim().parse::<f64>().ok()).collect())
        })
        .collect()
}

fn interpolate(a: &[Vec<Option<f64>>], b: &[Vec<Option<f64>>], tcol: usize) -> LabResult<Vec<Vec<Option<f64>>>> {
    let tb: Vec<f64> = b.iter().map(|r| r[tcol].unwrap_or(f64::NAN)).collect();
    if tb.iter().any(|t| !t.is_finite()) || tb.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Schema("time column of the second file is not increasing".into()));
    }
    a.iter()
        .map(|ra| {
            let t = ra[tcol].ok_or_else(|| LabError::Schema("non-numeric time".into()))?;
            let slack = 1e-9 * (1.0 + t.abs());
            if tb.is_empty() || t < tb[0] - slack || t > tb[tb.len() - 1] + slack {
                return Err(LabError::Schema(format!("time {t} lies outside the second file's range")));
            }
            let (i0, i1) = if tb.len() == 1 {
                (0, 0)
            } else {
                let k = tb.partition_point(|x| *x < t).clamp(1, tb.len() - 1);
                (k - 1, k)
            };
            let w = if i0 == i1 { 0.0 } else { ((t - tb[i0]) / (tb[i1] - tb[i0])).clamp(0.0, 1.0) };
            Ok((0..ra.len())
                .map(|c| match (b[i0][c], b[i1][c]) {
                    (Some(x), Some(y)) => Some(x + w * (y - x)),
                    _ => None,
                })
                .collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[[f64; 2]]) -> ParsedCsv {
        let mut text = String::from("# schema: trajectory/1\nt,a\n");
        for r in rows {
            text.push_str(&format!("{},{}\n", r[0], r[1]));
        }
        ParsedCsv::parse(&text).unwrap()
    }

    #[test]
    fn identical_tables_pass() {
        let a = table(&[[0.0, 1.0], [0.5, 2.0]]);
        let r = compare(&a, &a, 0.0).unwrap();
        assert!(r.passed());
        assert_eq!(r.columns[0].max, 0.0);
    }

    #[test]
    fn perturbed_column_is_named() {
        let a = table(&[[0.0, 1.0], [0.5, 2.0]]);
        let b = table(&[[0.0, 1.0], [0.5, 2.1]]);
        let r = compare(&a, &b, 1e-3).unwrap();
        assert_eq!(r.failing(), vec!["a"]);
        assert!((r.columns[0].mean - 0.05).abs() < 1e-12);
    }

    #[test]
    fn finer_second_grid_is_interpolated() {
        let a = table(&[[0.0, 0.0], [1.0, 2.0]]);
        let b = table(&[[0.0, 0.0], [0.5, 1.0], [1.0, 2.0]]);
        let r = compare(&a, &b, 1e-12).unwrap();
        assert!(r.interpolated && r.passed());
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let a = table(&[[0.0, 1.0]]);
        let b = ParsedCsv::parse("# schema: trajectory/1\nt,b\n0,1\n").unwrap();
        assert!(matches!(compare(&a, &b, 1.0), Err(LabError::Schema(_))));
        let c = ParsedCsv::parse("# schema: walks/1\nt,a\n0,1\n").unwrap();
        assert!(matches!(compare(&a, &c, 1.0), Err(LabError::Schema(_))));
    }
}
