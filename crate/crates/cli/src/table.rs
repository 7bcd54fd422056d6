//! CSV tables with `#`-prefixed metadata lines.
//!
//! ```text
//! # command=cycles
//! # a=-1
//! x0,zonal_type,multiplier,stability,symmetric
//! -2.6,one_lower,0.0018674427317079893,attracting,false
//! ```
//!
//! Emission is canonical, so parsing a file and emitting it again gives the
//! same bytes.

use crate::error::CliError;

/// Separator for list-valued cells.
pub const LIST_SEP: &str = ";";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            meta: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn emit(&self) -> Result<String, CliError> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str("# ");
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Usage(format!("csv buffer: {e}")))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut meta = Vec::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix("# ") else {
                break;
            };
            let rest = rest.trim_end_matches('\n');
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("metadata line without '=': {rest}")))?;
            meta.push((k.to_string(), v.to_string()));
            body_start += line.len();
        }
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text[body_start..].as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Table { meta, header, rows })
    }
}

pub fn join(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(LIST_SEP)
}

pub fn split(cell: &str) -> Result<Vec<f64>, CliError> {
    if cell.is_empty() {
        return Ok(Vec::new());
    }
    cell.split(LIST_SEP)
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("not a number: {s}")))
        })
        .collect()
}
