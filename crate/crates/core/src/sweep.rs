//! Gridded result tables and their CSV / JSON encodings.
//!
//! CSV layout: `# key=value` metadata lines, one header row (axis names,
//! value columns, `excluded`), then one row per grid point with the first
//! axis varying slowest. Floats carry 17 significant digits; excluded cells
//! hold the token `nan`.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        check_grid(&name, &values)?;
        Ok(Axis { name, values })
    }
}

pub(crate) fn check_grid(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidGrid(format!("axis {name} is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!("axis {name} has non-finite values")));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(format!("axis {name} is not strictly increasing")));
    }
    Ok(())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub metadata: Vec<(String, String)>,
    pub axes: Vec<Axis>,
    pub columns: Vec<String>,
    /// `values[column][cell]`, cells in row-major axis order.
    pub values: Vec<Vec<f64>>,
    pub excluded: Vec<bool>,
}

impl SweepTable {
    pub fn new(
        metadata: Vec<(String, String)>,
        axes: Vec<Axis>,
        columns: Vec<String>,
        values: Vec<Vec<f64>>,
        excluded: Vec<bool>,
    ) -> Result<Self> {
        let cells: usize = axes.iter().map(|a| a.values.len()).product();
        if values.len() != columns.len() {
            return Err(Error::InvalidGrid("column count mismatch".into()));
        }
        if values.iter().any(|v| v.len() != cells) || excluded.len() != cells {
            return Err(Error::InvalidGrid(format!("expected {cells} cells per column")));
        }
        Ok(SweepTable {
            metadata,
            axes,
            columns,
            values,
            excluded,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.excluded.len()
    }

    /// Axis values of cell `idx`.
    pub fn coordinates(&self, idx: usize) -> Vec<f64> {
        let mut rem = idx;
        let mut coords = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let len = axis.values.len();
            coords[k] = axis.values[rem % len];
            rem /= len;
        }
        coords
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|k| self.values[k].as_slice())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        let header: Vec<&str> = self
            .axes
            .iter()
            .map(|a| a.name.as_str())
            .chain(self.columns.iter().map(String::as_str))
            .chain(std::iter::once("excluded"))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for idx in 0..self.cell_count() {
            let mut fields: Vec<String> = self.coordinates(idx).into_iter().map(fmt_float).collect();
            fields.extend(self.values.iter().map(|col| fmt_float(col[idx])));
            fields.push(if self.excluded[idx] { "1" } else { "0" }.to_string());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    /// Parses a table previously written by [`SweepTable::to_csv_string`].
    /// `axis_count` says how many leading columns are axes.
    pub fn from_csv_str(text: &str, axis_count: usize) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidGrid(format!("csv: {msg}"));
        let mut metadata = Vec::new();
        let mut lines = text.lines();
        let header = loop {
            let line = lines.next().ok_or_else(|| bad("missing header"))?;
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta.split_once('=').ok_or_else(|| bad("metadata without '='"))?;
                metadata.push((k.to_string(), v.to_string()));
            } else {
                break line;
            }
        };
        let names: Vec<&str> = header.split(',').collect();
        if names.len() < axis_count + 1 || names.last() != Some(&"excluded") {
            return Err(bad("header must end with 'excluded'"));
        }
        let ncols = names.len() - axis_count - 1;
        let mut coords: Vec<Vec<f64>> = vec![Vec::new(); axis_count];
        let mut values: Vec<Vec<f64>> = vec![Vec::new(); ncols];
        let mut excluded = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != names.len() {
                return Err(bad("row width differs from header"));
            }
            for k in 0..axis_count {
                coords[k].push(parse_float(fields[k]).ok_or_else(|| bad("bad axis value"))?);
            }
            for k in 0..ncols {
                values[k].push(parse_float(fields[axis_count + k]).ok_or_else(|| bad("bad value"))?);
            }
            excluded.push(match *fields.last().unwrap() {
                "0" => false,
                "1" => true,
                _ => return Err(bad("excluded must be 0 or 1")),
            });
        }
        // Recover each axis from the row-major coordinate columns.
        let mut axes = Vec::with_capacity(axis_count);
        for (k, col) in coords.into_iter().enumerate() {
            let mut distinct: Vec<f64> = Vec::new();
            for &v in &col {
                if !distinct.contains(&v) {
                    distinct.push(v);
                }
            }
            if distinct.is_empty() {
                return Err(bad("no rows"));
            }
            axes.push(Axis::new(names[k], distinct)?);
        }
        SweepTable::new(
            metadata,
            axes,
            names[axis_count..names.len() - 1].iter().map(|s| s.to_string()).collect(),
            values,
            excluded,
        )
    }

    pub fn to_json(&self) -> Value {
        let metadata: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let axes: Vec<Value> = self
            .axes
            .iter()
            .map(|a| json!({"name": a.name, "values": a.values}))
            .collect();
        let rows: Vec<Value> = (0..self.cell_count())
            .map(|idx| {
                let mut row = Map::new();
                for (axis, x) in self.axes.iter().zip(self.coordinates(idx)) {
                    row.insert(axis.name.clone(), json_float(x));
                }
                for (name, col) in self.columns.iter().zip(&self.values) {
                    row.insert(name.clone(), json_float(col[idx]));
                }
                row.insert("excluded".into(), Value::Bool(self.excluded[idx]));
                Value::Object(row)
            })
            .collect();
        json!({"metadata": metadata, "axes": axes, "rows": rows})
    }
}

fn json_float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    if s == "nan" {
        Some(f64::NAN)
    } else {
        s.parse().ok()
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> SweepTable {
        SweepTable::new(
            vec![("kind".into(), "demo".into())],
            vec![
                Axis::new("a", vec![0.0, 1.0]).unwrap(),
                Axis::new("b", vec![0.1, 0.2, 0.3]).unwrap(),
            ],
            vec!["v".into()],
            vec![vec![1.0, 2.0, f64::NAN, 4.0, 5.0, 1.0 / 3.0]],
            vec![false, false, true, false, false, false],
        )
        .unwrap()
    }

    #[test]
    fn csv_layout() {
        let csv = table().to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# kind=demo");
        assert_eq!(lines[1], "a,b,v,excluded");
        assert_eq!(
            lines[2],
            "0.0000000000000000e0,1.0000000000000001e-1,1.0000000000000000e0,0"
        );
        assert!(lines[4].ends_with(",nan,1"));
        assert_eq!(lines.len(), 2 + 6);
    }

    #[test]
    fn csv_parse_back() {
        let t = table();
        let back = SweepTable::from_csv_str(&t.to_csv_string(), 2).unwrap();
        assert_eq!(back.axes, t.axes);
        assert_eq!(back.metadata, t.metadata);
        assert_eq!(back.excluded, t.excluded);
        assert_eq!(back.values[0][5].to_bits(), t.values[0][5].to_bits());
        assert!(back.values[0][2].is_nan());
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Axis::new("x", vec![]).is_err());
        assert!(Axis::new("x", vec![0.0, 0.0]).is_err());
        assert!(Axis::new("x", vec![1.0, 0.5]).is_err());
        assert!(Axis::new("x", vec![0.0, f64::NAN]).is_err());
        let err = SweepTable::new(
            vec![],
            vec![Axis::new("x", vec![0.0, 1.0]).unwrap()],
            vec!["v".into()],
            vec![vec![1.0]],
            vec![false],
        );
        assert!(err.is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, std::f64::consts::PI, 181);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[180], std::f64::consts::PI);
        assert_eq!(g[90], std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
