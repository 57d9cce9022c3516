//! Loading observed series from `plain` or `dated` text files.
//!
//! `plain` holds one value per line. `dated` is a two-column `date,close`
//! CSV whose optional header row is recognised by a non-numeric second
//! field. Dates are kept verbatim as labels and never parsed.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of observations accepted by the pipeline.
pub const MIN_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Plain,
    Dated,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" => Ok(Format::Plain),
            "dated" => Ok(Format::Dated),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

/// An observed realization `v_1..v_n` at integer positions `1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::build(values, None)
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} values",
                labels.len(),
                values.len()
            )));
        }
        Self::build(values, Some(labels))
    }

    fn build(values: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if values.len() < MIN_LEN {
            return Err(Error::TooShort { n: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "value at position {} is not finite",
                i + 1
            )));
        }
        Ok(TimeSeries { values, labels })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Contiguous sub-series of `len` points starting at 1-based position
    /// `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<TimeSeries> {
        if start == 0 || start - 1 + len > self.len() {
            return Err(Error::InvalidArgument(format!(
                "window start={start} n={len} does not fit a series of length {}",
                self.len()
            )));
        }
        let range = start - 1..start - 1 + len;
        let values = self.values[range.clone()].to_vec();
        match &self.labels {
            Some(l) => TimeSeries::with_labels(values, l[range].to_vec()),
            None => TimeSeries::new(values),
        }
    }

    /// Serialize in `plain` format with round-trip precision.
    pub fn to_plain(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 12);
        for v in &self.values {
            // `{}` on f64 prints the shortest string that parses back exactly.
            let _ = writeln!(out, "{v}");
        }
        out
    }
}

pub fn load_series(path: impl AsRef<Path>, format: Format) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_series(&text, format)
}

pub fn parse_series(text: &str, format: Format) -> Result<TimeSeries> {
    match format {
        Format::Plain => parse_plain(text),
        Format::Dated => parse_dated(text),
    }
}

/// Lines of `text` with their 1-based numbers; `\r\n` endings are accepted
/// and a single trailing newline does not produce an empty row.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let body = body.strip_suffix('\r').unwrap_or(body);
    let empty = body.is_empty();
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(move |_| !empty)
}

fn parse_number(field: &str, line: usize, raw: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::MalformedRow {
            line,
            content: raw.to_string(),
        })
}

fn parse_plain(text: &str) -> Result<TimeSeries> {
    let values = numbered_lines(text)
        .map(|(line, raw)| parse_number(raw, line, raw))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(values)
}

fn parse_dated(text: &str) -> Result<TimeSeries> {
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (line, raw) in numbered_lines(text) {
        let mut fields = raw.split(',');
        let (date, close) = match (fields.next(), fields.next(), fields.next()) {
            (Some(d), Some(c), None) => (d.trim(), c),
            _ => {
                return Err(Error::MalformedRow {
                    line,
                    content: raw.to_string(),
                })
            }
        };
        if line == 1 && close.trim().parse::<f64>().is_err() {
            continue;
        }
        values.push(parse_number(close, line, raw)?);
        labels.push(date.to_string());
    }
    TimeSeries::with_labels(values, labels)
}
