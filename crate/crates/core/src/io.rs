//! Reading posterior draws from files and writing test results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::PosteriorSample;
use crate::evidence::FbstResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawsFormat {
    Csv,
    Json,
    /// One number per line.
    Plain,
}

impl DrawsFormat {
    /// Guesses the format from the file extension, defaulting to plain.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => DrawsFormat::Csv,
            Some("json") => DrawsFormat::Json,
            _ => DrawsFormat::Plain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    /// Zero-based column position.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrawsFileSpec {
    pub path: PathBuf,
    pub format: DrawsFormat,
    pub column: Option<ColumnSelector>,
    pub delimiter: u8,
}

impl DrawsFileSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let format = DrawsFormat::from_path(&path);
        DrawsFileSpec { path, format, column: None, delimiter: b',' }
    }

    pub fn with_column(mut self, column: ColumnSelector) -> Self {
        self.column = Some(column);
        self
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("column not found: {0}")]
    ColumnNotFound(String),
    #[error("non-finite value {value:?} at {location}")]
    NonFinite { location: String, value: String },
    #[error("no draws in column {0}")]
    EmptyColumn(String),
    #[error(transparent)]
    Sample(#[from] crate::Error),
}

/// A loaded column of draws; turned into a [`PosteriorSample`] by [`load_draws`].
#[derive(Debug, Clone, PartialEq)]
pub struct DrawColumn {
    pub label: String,
    pub values: Vec<f64>,
}

fn parse_number(field: &str, location: impl Fn() -> String) -> Result<f64, LoadError> {
    let trimmed = field.trim();
    let value: f64 = trimmed
        .parse()
        .map_err(|_| LoadError::Parse { location: location(), message: format!("{trimmed:?} is not a number") })?;
    if !value.is_finite() {
        return Err(LoadError::NonFinite { location: location(), value: trimmed.to_string() });
    }
    Ok(value)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("draws").to_string()
}

/// Reads the raw column without the minimum-size check of
/// [`PosteriorSample`].
pub fn read_draw_column(spec: &DrawsFileSpec) -> Result<DrawColumn, LoadError> {
    let text = fs::read_to_string(&spec.path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            LoadError::NotFound(spec.path.clone())
        } else {
            LoadError::Io { path: spec.path.clone(), source }
        }
    })?;
    let column = match spec.format {
        DrawsFormat::Plain => read_plain(&text, &spec.path)?,
        DrawsFormat::Csv => read_csv(&text, spec)?,
        DrawsFormat::Json => read_json(&text, spec)?,
    };
    if column.values.is_empty() {
        return Err(LoadError::EmptyColumn(column.label));
    }
    Ok(column)
}

pub fn load_draws(spec: &DrawsFileSpec) -> Result<PosteriorSample, LoadError> {
    let column = read_draw_column(spec)?;
    Ok(PosteriorSample::new(column.label, column.values)?)
}

/// Reads a tabulated reference density: a CSV file with a header row whose
/// first column is the parameter grid and second column the density.
pub fn read_reference_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), LoadError> {
    let base = DrawsFileSpec { path: path.to_path_buf(), format: DrawsFormat::Csv, column: None, delimiter: b',' };
    let grid = read_draw_column(&base.clone().with_column(ColumnSelector::Index(0)))?;
    let values = read_draw_column(&base.with_column(ColumnSelector::Index(1)))?;
    Ok((grid.values, values.values))
}

fn read_plain(text: &str, path: &Path) -> Result<DrawColumn, LoadError> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        values.push(parse_number(line, || format!("line {}", i + 1))?);
    }
    Ok(DrawColumn { label: file_stem(path), values })
}

fn read_csv(text: &str, spec: &DrawsFileSpec) -> Result<DrawColumn, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers =
        reader.headers().map_err(|e| LoadError::Parse { location: "line 1".into(), message: e.to_string() })?.clone();
    let index = match &spec.column {
        Some(ColumnSelector::Name(name)) => {
            headers.iter().position(|h| h == name).ok_or_else(|| LoadError::ColumnNotFound(name.clone()))?
        }
        Some(ColumnSelector::Index(i)) if *i < headers.len() => *i,
        Some(ColumnSelector::Index(i)) => return Err(LoadError::ColumnNotFound(format!("#{i}"))),
        None if headers.len() == 1 => 0,
        None => return Err(LoadError::ColumnNotFound(format!("no column selected among {} columns", headers.len()))),
    };
    let label = match headers.get(index) {
        Some(h) if !h.is_empty() => h.to_string(),
        _ => file_stem(&spec.path),
    };
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            LoadError::Parse { location: format!("line {line}"), message: e.to_string() }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = record.get(index).ok_or_else(|| LoadError::Parse {
            location: format!("line {line}"),
            message: format!("missing column {label}"),
        })?;
        values.push(parse_number(field, || format!("line {line}, column {label}"))?);
    }
    Ok(DrawColumn { label, values })
}

fn json_array(items: &[serde_json::Value], what: &str) -> Result<Vec<f64>, LoadError> {
    items
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| LoadError::Parse {
                location: format!("{what}[{i}]"),
                message: format!("{n} is not representable"),
            }),
            serde_json::Value::Null => {
                Err(LoadError::NonFinite { location: format!("{what}[{i}]"), value: "null".into() })
            }
            other => Err(LoadError::Parse {
                location: format!("{what}[{i}]"),
                message: format!("expected a number, found {other}"),
            }),
        })
        .collect()
}

fn read_json(text: &str, spec: &DrawsFileSpec) -> Result<DrawColumn, LoadError> {
    let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| LoadError::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    match doc {
        serde_json::Value::Array(items) => {
            let label = file_stem(&spec.path);
            Ok(DrawColumn { values: json_array(&items, &label)?, label })
        }
        serde_json::Value::Object(map) => {
            let key = match &spec.column {
                Some(ColumnSelector::Name(name)) => name.clone(),
                Some(ColumnSelector::Index(i)) => {
                    return Err(LoadError::ColumnNotFound(format!("#{i} (select object members by name)")))
                }
                None if map.len() == 1 => map.keys().next().cloned().unwrap_or_default(),
                None => {
                    return Err(LoadError::ColumnNotFound(format!("no member selected among {} members", map.len())))
                }
            };
            match map.get(&key) {
                Some(serde_json::Value::Array(items)) => {
                    Ok(DrawColumn { values: json_array(items, &key)?, label: key })
                }
                Some(_) => {
                    Err(LoadError::Parse { location: key.clone(), message: "member is not an array of numbers".into() })
                }
                None => Err(LoadError::ColumnNotFound(key)),
            }
        }
        _ => Err(LoadError::Parse {
            location: "document root".into(),
            message: "expected an array of numbers or an object of named arrays".into(),
        }),
    }
}

/// A test result together with run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    #[serde(flatten)]
    pub result: FbstResult,
    pub tool_version: String,
    pub sample_label: String,
    pub sample_size: usize,
    pub bandwidth: f64,
    pub grid_size: usize,
    pub timestamp: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct WriteError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

/// Formats `x` with at most `digits` significant digits, dropping trailing
/// zeros and switching to scientific notation when that is shorter.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent form");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
    let sig = mantissa.chars().filter(char::is_ascii_digit).count() as i32;
    let decimals = (sig - 1 - exponent).max(0) as usize;
    let fixed = format!("{:.*}", decimals, x);
    let sci = format!("{mantissa}e{}{:02}", if exponent < 0 { '-' } else { '+' }, exponent.abs());
    if fixed.len() <= sci.len() {
        fixed
    } else {
        sci
    }
}

/// The console summary block.
pub fn render_text(doc: &ResultDocument) -> String {
    let r = &doc.result;
    let reference = if r.reference_descriptor == "flat" { "Flat" } else { "User-defined" };
    let mut out = String::new();
    let _ = writeln!(out, "Full Bayesian Significance Test for testing a sharp hypothesis against its alternative:");
    let _ = writeln!(out, "Reference function: {reference}");
    let _ = writeln!(
        out,
        "Testing Hypothesis H_0:Parameter= {} against its alternative H_1",
        format_significant(r.null_value, 7)
    );
    let _ = writeln!(out, "Bayesian e-value against H_0: {}", format_significant(r.e_value_against, 7));
    let _ = writeln!(
        out,
        "p-value associated with the Bayesian e-value in favour of the null hypothesis: {}",
        format_significant(r.p_value, 7)
    );
    let _ = writeln!(out, "Standardized e-value: {}", format_significant(r.sev, 7));
    out
}

pub fn render_json(doc: &ResultDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("result documents always serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<ResultDocument, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn render(doc: &ResultDocument, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => render_json(doc),
        OutputFormat::Text => render_text(doc),
    }
}

pub fn write_result(doc: &ResultDocument, path: &Path, format: OutputFormat) -> Result<(), WriteError> {
    fs::write(path, render(doc, format)).map_err(|source| WriteError { path: path.to_path_buf(), source })
}
