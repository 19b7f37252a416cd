//! Count CSV ingestion: `unit_id,x[,y]`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::CountVector;

/// Parsed count data; `y` present only when the file has the third column
/// (evaluation mode).
#[derive(Debug, Clone, PartialEq)]
pub struct CountData {
    pub ids: Vec<String>,
    pub x: CountVector,
    pub y: Option<CountVector>,
}

impl CountData {
    pub fn d(&self) -> usize {
        self.ids.len()
    }
}

/// Read a `unit_id,x[,y]` CSV; every row must carry an x count, and either
/// all or none carry y.
pub fn ingest_counts(path: &Path) -> Result<CountData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let has_y = match headers.len() {
        2 => false,
        3 => true,
        n => {
            return Err(Error::InvalidArgument(format!(
                "{}: expected header unit_id,x[,y]; got {n} columns",
                path.display()
            )))
        }
    };
    if headers.get(0) != Some("unit_id") || headers.get(1) != Some("x") {
        return Err(Error::InvalidArgument(format!(
            "{}: expected header unit_id,x[,y]; got {:?}",
            path.display(),
            headers
        )));
    }
    if has_y && headers.get(2) != Some("y") {
        return Err(Error::InvalidArgument(format!(
            "{}: third column must be named y",
            path.display()
        )));
    }
    let mut ids = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record?;
        let expected = if has_y { 3 } else { 2 };
        if record.len() != expected {
            return Err(Error::parse(
                line,
                format!(
                    "{} line {line}: expected {expected} fields, got {}",
                    path.display(),
                    record.len()
                ),
            ));
        }
        let id = record.get(0).unwrap_or("");
        if id.is_empty() {
            return Err(Error::parse(
                line,
                format!("{} line {line}: empty unit_id", path.display()),
            ));
        }
        ids.push(id.to_string());
        x.push(parse_count(record.get(1).unwrap_or(""), path, line, "x")?);
        if has_y {
            y.push(parse_count(record.get(2).unwrap_or(""), path, line, "y")?);
        }
    }
    if ids.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(CountData {
        ids,
        x: CountVector(x),
        y: if has_y { Some(CountVector(y)) } else { None },
    })
}

fn parse_count(field: &str, path: &Path, line: usize, col: &str) -> Result<u64> {
    if field.is_empty() {
        return Err(Error::parse(
            line,
            format!("{} line {line}: missing {col} count", path.display()),
        ));
    }
    field.parse::<u64>().map_err(|_| {
        Error::parse(
            line,
            format!(
                "{} line {line}: {col} = '{field}' is not a nonnegative integer",
                path.display()
            ),
        )
    })
}
