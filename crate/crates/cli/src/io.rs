//! Array files and report output.
//!
//! Arrays are row-major. CSV files start with a `dims,<n>[,<m>]` line and
//! list the values on the following lines in any layout; JSON files hold
//! `{"dims": [...], "values": [...]}`. Cell side is always 1.

use std::fs;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};
use varlp::{ExponentField, Grid, GridFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayFile {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl ArrayFile {
    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.dims.clone(), 1.0)?)
    }

    pub fn function(&self) -> Result<GridFunction> {
        Ok(GridFunction::new(&self.grid()?, self.values.clone())?)
    }

    pub fn exponent(&self) -> Result<ExponentField> {
        Ok(ExponentField::new(&self.grid()?, self.values.clone())?)
    }
}

pub fn parse_csv(text: &str) -> Result<ArrayFile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records.next().context("empty CSV array")??;
    ensure!(header.get(0) == Some("dims"), "CSV array must start with a dims line");
    let dims = header
        .iter()
        .skip(1)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().with_context(|| format!("bad dimension {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::new();
    for record in records {
        for field in record?.iter().filter(|s| !s.is_empty()) {
            values.push(field.parse::<f64>().with_context(|| format!("bad value {field:?}"))?);
        }
    }
    check_shape(&dims, values.len())?;
    Ok(ArrayFile { dims, values })
}

pub fn parse_json(text: &str) -> Result<ArrayFile> {
    let a: ArrayFile = serde_json::from_str(text)?;
    check_shape(&a.dims, a.values.len())?;
    Ok(a)
}

fn check_shape(dims: &[usize], len: usize) -> Result<()> {
    ensure!(matches!(dims.len(), 1 | 2), "arrays must be 1D or 2D, got dims {dims:?}");
    let expected: usize = dims.iter().product();
    ensure!(expected == len, "dims {dims:?} need {expected} values, found {len}");
    Ok(())
}

/// Reads an array, choosing the format by extension (`.json`, else CSV).
pub fn read_array(path: &Path) -> Result<ArrayFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => parse_json(&text),
        _ => parse_csv(&text),
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

/// CSV text of an array: the dims line, then one line per grid row.
pub fn array_csv(grid: &Grid, values: &[f64]) -> String {
    let dims: Vec<String> = grid.extent().iter().map(usize::to_string).collect();
    let mut out = format!("dims,{}\n", dims.join(","));
    let row = *grid.extent().last().expect("grid has a dimension");
    for chunk in values.chunks(row) {
        let cells: Vec<String> = chunk.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Parses `"0.25,0.5"` style lists.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().with_context(|| format!("bad number {x:?}")))
        .collect()
}
