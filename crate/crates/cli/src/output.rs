//! Report types and their CSV / JSON encodings.
//!
//! CSV output is the row table followed by `# key=value` footer lines; JSON
//! is one object holding a `meta` block and the same rows. Floats are written
//! in shortest round-trip form, so re-reading either format recovers the
//! emitted values exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One fitted knot. Absent values are empty CSV cells / JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRow {
    pub x: f64,
    pub estimate: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub band_lo: Option<f64>,
    pub band_hi: Option<f64>,
    pub log_variance: Option<f64>,
    pub h_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmInfo {
    pub iterations: usize,
    pub converged: bool,
    pub final_sup_change: f64,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandInfo {
    /// `"default"` when the interval was chosen from the data.
    pub interval: String,
    pub x1: f64,
    pub x2: f64,
    pub c_value: f64,
    pub h_lower: f64,
    pub h_upper: f64,
    pub paths: usize,
    pub grid_points: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    pub n: usize,
    /// Number of distinct observed times.
    pub k: usize,
    pub events: usize,
    pub method: String,
    pub alpha: f64,
    pub seed: u64,
    pub em: Option<EmInfo>,
    /// Sup over knots of |EM − product-limit|, for `--method both`.
    pub discrepancy: Option<f64>,
    pub band: Option<BandInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub meta: FitMeta,
    pub rows: Vec<OutputRow>,
}

impl FitMeta {
    fn footer(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("n".to_string(), self.n.to_string()),
            ("k".into(), self.k.to_string()),
            ("events".into(), self.events.to_string()),
            ("method".into(), self.method.clone()),
            ("alpha".into(), fmt_f64(self.alpha)),
            ("seed".into(), self.seed.to_string()),
        ];
        if let Some(em) = &self.em {
            kv.push(("converged".into(), em.converged.to_string()));
            kv.push(("em_iterations".into(), em.iterations.to_string()));
            kv.push(("em_final_sup_change".into(), fmt_f64(em.final_sup_change)));
        }
        if let Some(d) = self.discrepancy {
            kv.push(("discrepancy".into(), fmt_f64(d)));
        }
        if let Some(b) = &self.band {
            kv.push(("band_interval".into(), b.interval.clone()));
            kv.push(("band_x1".into(), fmt_f64(b.x1)));
            kv.push(("band_x2".into(), fmt_f64(b.x2)));
            kv.push(("band_c".into(), fmt_f64(b.c_value)));
            kv.push(("band_h_lower".into(), fmt_f64(b.h_lower)));
            kv.push(("band_h_upper".into(), fmt_f64(b.h_upper)));
            kv.push(("band_paths".into(), b.paths.to_string()));
            kv.push(("band_grid".into(), b.grid_points.to_string()));
            kv.push(("band_seed".into(), b.seed.to_string()));
        }
        kv
    }
}

pub fn write_rows_csv<W: Write, T: Serialize>(
    rows: &[T],
    footer: &[(String, String)],
    mut out: W,
) -> Result<(), CliError> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for row in rows {
            w.serialize(row)
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        w.flush()?;
    }
    for (k, v) in footer {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(value: &T, mut out: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn write_fit_csv<W: Write>(report: &FitReport, out: W) -> Result<(), CliError> {
    write_rows_csv(&report.rows, &report.meta.footer(), out)
}

/// Rows of a CSV fit table, skipping footer lines.
pub fn read_fit_csv<R: Read>(input: R) -> Result<Vec<OutputRow>, csv::Error> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize()
        .collect()
}

/// Footer `key=value` pairs of a CSV fit table.
pub fn read_csv_footer(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn read_fit_json<R: Read>(input: R) -> serde_json::Result<FitReport> {
    serde_json::from_reader(input)
}

/// Shortest round-trip text for a float, switching to exponent form for very
/// small or large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}
