//! CSV series behind the estimator-versus-`j` chart: observed values, the
//! per-`j` estimator with its interval at the final `t`, the constant classic
//! line and a metadata row holding the `n` marker.
//!
//! Files and headers:
//!
//! | file            | header                              |
//! |-----------------|-------------------------------------|
//! | `series.csv`    | `index,value` or `index,value,date` |
//! | `estimator.csv` | `j,m_hat,ci_low,ci_high,g`          |
//! | `classic.csv`   | `j,value`                           |
//! | `meta.csv`      | `n,theta,t_final,j_final,epsilon`   |
//!
//! Reals are written with 10 significant digits. An invalid interval bound
//! and a missing accepted pair are written as empty fields.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;
use crate::scan::ScanResult;

pub const SERIES_FILE: &str = "series.csv";
pub const ESTIMATOR_FILE: &str = "estimator.csv";
pub const CLASSIC_FILE: &str = "classic.csv";
pub const META_FILE: &str = "meta.csv";

pub const ESTIMATOR_HEADER: &str = "j,m_hat,ci_low,ci_high,g";
pub const CLASSIC_HEADER: &str = "j,value";
pub const META_HEADER: &str = "n,theta,t_final,j_final,epsilon";

/// Format with 10 significant digits; plain notation for moderate
/// magnitudes, scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Let the scientific formatter do the rounding, then read the exponent
    // back so that e.g. 9.9999999999 is handled after rounding up.
    let sci = format!("{x:.9e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write the four CSV files into `out_dir`, creating it if needed. Returns
/// the paths written.
pub fn emit_plot_data(result: &ScanResult, ts: &TimeSeries, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if result.trace.is_empty() {
        return Err(Error::InvalidArgument("scan trace is empty".into()));
    }
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;

    let mut series = String::new();
    match ts.labels() {
        Some(labels) => {
            series.push_str("index,value,date\n");
            for (i, (v, d)) in ts.values().iter().zip(labels).enumerate() {
                let _ = writeln!(series, "{},{},{}", i + 1, fmt_sig(*v), d);
            }
        }
        None => {
            series.push_str("index,value\n");
            for (i, v) in ts.values().iter().enumerate() {
                let _ = writeln!(series, "{},{}", i + 1, fmt_sig(*v));
            }
        }
    }

    let mut estimator = format!("{ESTIMATOR_HEADER}\n");
    for r in &result.final_row {
        let _ = writeln!(
            estimator,
            "{},{},{},{},{}",
            r.j,
            fmt_sig(r.m_hat),
            fmt_opt(r.ci_low),
            fmt_opt(r.ci_high),
            fmt_sig(r.g)
        );
    }

    let mut classic = format!("{CLASSIC_HEADER}\n");
    if let Some(c) = result.classic_value {
        let value = fmt_sig(c);
        for j in result.n as u64 + 1..=result.config.j_max {
            let _ = writeln!(classic, "{j},{value}");
        }
    }

    let (t_final, j_final) = match &result.accepted {
        Some(a) => (a.t.to_string(), a.j.to_string()),
        None => (String::new(), String::new()),
    };
    let meta = format!(
        "{META_HEADER}\n{},{},{},{},{}\n",
        result.n,
        fmt_sig(result.theta),
        t_final,
        j_final,
        fmt_sig(result.config.epsilon)
    );

    let files = [
        (SERIES_FILE, series),
        (ESTIMATOR_FILE, estimator),
        (CLASSIC_FILE, classic),
        (META_FILE, meta),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = out_dir.join(name);
        write_file(&path, &body)?;
        written.push(path);
    }
    Ok(written)
}

/// A parsed CSV file: header fields and rows of raw string fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric column; empty fields become `None`.
    pub fn reals(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let col = self
            .column(name)
            .ok_or_else(|| Error::InvalidArgument(format!("no column {name:?}")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let field = row.get(col).map(String::as_str).unwrap_or("");
                if field.is_empty() {
                    return Ok(None);
                }
                field.parse::<f64>().map(Some).map_err(|_| Error::MalformedRow {
                    line: i + 2,
                    content: row.join(","),
                })
            })
            .collect()
    }
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or(Error::EmptyInput)?
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::MalformedRow {
                line: i + 2,
                content: row.join(","),
            });
        }
    }
    Ok(CsvTable { header, rows })
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text)
}
