//! Tabular and JSON artifacts.
//!
//! Every pipeline result is turned into a [`Table`] with a fixed header before
//! it is written, so CSV bytes depend only on the numbers. Floats use Rust's
//! shortest round-trip formatting.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::airy::PdeTable;
use crate::carousel::{CountSample, GapRecord};
use crate::ensembles::{SymTridiagonal, VerblunskyCoeffs};
use crate::error::{Error, Result};
use crate::statkit::CdfTable;
use crate::szego::{BPath, DiracReport};
use crate::tridiag::WeightedPointMeasure;

/// Version of the CSV layouts below; bumped on any header change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// A named-column table. `schema` identifies the layout in manifests.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(schema: &'static str, header: Vec<&'static str>) -> Self {
        Table {
            schema,
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column values parsed back as floats (empty cells become NaN).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| *h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[j] {
                    Cell::Int(i) => *i as f64,
                    Cell::Float(x) => *x,
                    _ => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// `{"schema", "columns", "rows"}` with numbers kept as JSON numbers
    /// (non-finite floats become strings).
    pub fn to_json(&self) -> serde_json::Value {
        let cell = |c: &Cell| match c {
            Cell::Int(i) => serde_json::json!(i),
            Cell::Float(x) if x.is_finite() => serde_json::json!(x),
            Cell::Float(x) => serde_json::json!(x.to_string()),
            Cell::Text(s) => serde_json::json!(s),
            Cell::Empty => serde_json::Value::Null,
        };
        serde_json::json!({
            "schema": self.schema,
            "columns": self.header,
            "rows": self.rows.iter().map(|r| r.iter().map(cell).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Reads a CSV written by [`Table::write_csv`] back into header and raw rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()).map_err(csv_err))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

pub fn tridiagonal_table(t: &SymTridiagonal) -> Table {
    let mut tab = Table::new("tridiagonal", vec!["index", "diag", "offdiag"]);
    for (i, &d) in t.diag.iter().enumerate() {
        let off = t.offdiag.get(i).map_or(Cell::Empty, |&b| b.into());
        tab.push(vec![i.into(), d.into(), off]);
    }
    tab
}

pub fn values_table(schema: &'static str, column: &'static str, xs: &[f64]) -> Table {
    let mut tab = Table::new(schema, vec!["index", column]);
    for (i, &x) in xs.iter().enumerate() {
        tab.push(vec![i.into(), x.into()]);
    }
    tab
}

pub fn measure_table(mu: &WeightedPointMeasure) -> Table {
    let mut tab = Table::new("measure", vec!["location", "weight"]);
    for &(x, q) in &mu.atoms {
        tab.push(vec![x.into(), q.into()]);
    }
    tab
}

pub fn cdf_table(c: &CdfTable) -> Table {
    let mut tab = Table::new("cdf", vec!["a", "cdf", "ci_halfwidth"]);
    for (i, (&a, &v)) in c.grid.iter().zip(&c.values).enumerate() {
        let ci = c.ci_halfwidth.as_ref().map_or(Cell::Empty, |h| h[i].into());
        tab.push(vec![a.into(), v.into(), ci]);
    }
    tab
}

/// Long format, one row per (t, w) node.
pub fn pde_table(p: &PdeTable) -> Table {
    let mut tab = Table::new("pde", vec!["t", "w", "F"]);
    for (i, &t) in p.t_grid.iter().enumerate() {
        for (j, &w) in p.w_grid.iter().enumerate() {
            tab.push(vec![t.into(), w.into(), p.at(i, j).into()]);
        }
    }
    tab
}

/// Rows (t, reference, comparison, |difference|) for two laws on one grid.
pub fn comparison_table(grid: &[f64], reference: &[f64], other: &[f64]) -> Table {
    let mut tab = Table::new("comparison", vec!["t", "reference", "estimate", "abs_diff"]);
    for ((&t, &r), &o) in grid.iter().zip(reference).zip(other) {
        tab.push(vec![t.into(), r.into(), o.into(), (r - o).abs().into()]);
    }
    tab
}

pub fn verblunsky_table(alpha: &VerblunskyCoeffs) -> Table {
    let mut tab = Table::new("verblunsky", vec!["k", "re", "im", "modulus"]);
    for (k, a) in alpha.alpha.iter().enumerate() {
        tab.push(vec![k.into(), a.re.into(), a.im.into(), a.norm().into()]);
    }
    tab
}

pub fn bpath_table(p: &BPath) -> Table {
    let mut tab = Table::new("bpath", vec!["k", "re", "im"]);
    for (k, b) in p.b.iter().enumerate() {
        tab.push(vec![k.into(), b.re.into(), b.im.into()]);
    }
    tab.push(vec!["star".into(), p.b_star.re.into(), p.b_star.im.into()]);
    tab
}

pub fn dirac_table(r: &DiracReport) -> Table {
    let mut tab = Table::new("dirac", vec!["index", "lambda", "boundary_defect", "identity_defect"]);
    for (i, &l) in r.lambdas.iter().enumerate() {
        tab.push(vec![
            i.into(),
            l.into(),
            r.boundary_defects[i].into(),
            r.identity_defects[i].into(),
        ]);
    }
    tab
}

pub fn counts_table(samples: &[Vec<CountSample>]) -> Table {
    let mut tab = Table::new("counts", vec!["path", "lambda", "count", "horizon", "certified"]);
    for (p, row) in samples.iter().enumerate() {
        for s in row {
            tab.push(vec![
                p.into(),
                s.lambda.into(),
                s.count.into(),
                s.horizon.into(),
                s.certified.into(),
            ]);
        }
    }
    tab
}

/// Histogram of nonnegative integer counts.
pub fn count_histogram(counts: &[u64]) -> Table {
    let mut tab = Table::new("count_histogram", vec!["count", "frequency"]);
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut freq = vec![0u64; max as usize + 1];
    for &c in counts {
        freq[c as usize] += 1;
    }
    if !counts.is_empty() {
        for (c, &f) in freq.iter().enumerate() {
            tab.push(vec![c.into(), f.into()]);
        }
    }
    tab
}

pub fn gap_table(records: &[GapRecord]) -> Table {
    let mut tab = Table::new(
        "gap",
        vec![
            "beta",
            "lambda",
            "k",
            "paths",
            "hits",
            "p_mc",
            "ci_lo",
            "ci_hi",
            "neg_log_p_over_leading",
            "leading",
        ],
    );
    for r in records {
        let ratio = if r.mc_estimate > 0.0 {
            -r.mc_estimate.ln() / r.theory_leading.leading
        } else {
            f64::INFINITY
        };
        tab.push(vec![
            r.beta.into(),
            r.lambda.into(),
            r.k.into(),
            r.paths.into(),
            r.hits.into(),
            r.mc_estimate.into(),
            r.ci.0.into(),
            r.ci.1.into(),
            ratio.into(),
            r.theory_leading.leading.into(),
        ]);
    }
    tab
}

/// Provenance written next to every CSV artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub threads: usize,
    pub code_version: String,
    pub schema: String,
    pub schema_version: u32,
    pub outputs: Vec<String>,
    /// Seconds since the Unix epoch at start.
    pub timestamp: f64,
    pub wall_time_s: f64,
    /// Name and value of the run's summary statistic, if any.
    pub headline: Option<(String, f64)>,
    pub passed: Option<bool>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))
}
