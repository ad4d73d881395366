use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::grid::RegionGrid;
use super::trace::BoundaryCurve;
use crate::error::Result;

/// Significant digits written to CSV files.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` rounded to [`SIGNIFICANT_DIGITS`], in the shortest form that
/// reads back to the rounded value.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("float");
    if rounded == 0.0 {
        return "0".into();
    }
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Column-named rows written as CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl RegionGrid {
    pub fn to_table(&self) -> Table {
        let mut cols: Vec<String> = self.spec.axes.iter().map(|a| a.name.as_str().to_string()).collect();
        cols.extend(["lambda_min", "entangled", "status"].map(String::from));
        let mut t = Table::new(cols);
        for n in &self.nodes {
            let mut row: Vec<Cell> = n.coords.iter().map(|&x| Cell::Num(x)).collect();
            row.push(n.lambda.into());
            row.push(n.entangled.into());
            row.push(n.status.as_str().into());
            t.push(row);
        }
        t
    }

    /// Metadata describing how the grid was produced.
    pub fn metadata(&self) -> Value {
        json!({
            "kind": "region-grid",
            "code_version": env!("CARGO_PKG_VERSION"),
            "spec": self.spec,
            "tolerances": {
                "entanglement_eps": self.spec.eps,
                "significant_digits": SIGNIFICANT_DIGITS,
            },
            "counts": {
                "nodes": self.nodes.len(),
                "entangled": self.entangled_count(),
                "outside": self.count(super::grid::NodeStatus::Outside),
                "errors": self.count(super::grid::NodeStatus::Error),
            },
            "errors": self.errors().take(20).map(|n| json!({
                "coords": n.coords,
                "message": n.message,
            })).collect::<Vec<_>>(),
        })
    }

    /// Writes `path` and the sidecar `path` with a `.json` extension.
    pub fn write(&self, path: &Path) -> Result<Vec<std::path::PathBuf>> {
        self.to_table().write_csv(path)?;
        let side = path.with_extension("json");
        write_json(&side, &self.metadata())?;
        Ok(vec![path.to_path_buf(), side])
    }
}

impl BoundaryCurve {
    pub fn to_table(&self) -> Table {
        let mut cols = Vec::new();
        if let Some(f) = self.free_axis {
            cols.push(f.as_str().to_string());
        }
        cols.extend([self.scan_axis.as_str().to_string(), "est_error".into(), "lambda".into()]);
        let mut t = Table::new(cols);
        for p in &self.points {
            let mut row = Vec::new();
            if self.free_axis.is_some() {
                row.push(p.free.into());
            }
            row.extend([p.value.into(), p.est_error.into(), p.lambda.into()]);
            t.push(row);
        }
        t
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, v: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(-1.0), "-1");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0f64.sqrt() * 1e-9), "1.41421356237e-9");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }
}
