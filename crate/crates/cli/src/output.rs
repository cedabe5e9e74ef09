//! CSV and JSON serialization of result tables.
//!
//! CSV: comma separated, LF line endings, header row first. Numbers are
//! printed with 17 significant digits, flags as `true`/`false`, failed
//! cells as `ERR:<ErrorName>`. Complex quantities occupy `_re`/`_im`
//! column pairs.

use std::path::Path;

use optocool_core::{Cell, SweepTable, C64};
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
const ERROR_PREFIX: &str = "ERR:";

/// Build provenance recorded in JSON output.
pub const GIT_DESCRIBE: &str = env!("OPTOCOOL_GIT_DESCRIBE");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: u32,
    pub command: String,
    pub git_describe: String,
    pub config: RunConfig,
    /// Command-specific provenance, e.g. the propagation method used.
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Meta,
}

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn render_cell(c: &Cell) -> String {
    match c {
        Cell::Number(x) => format_number(*x),
        Cell::Flag(b) => b.to_string(),
        Cell::Error { error } => format!("{ERROR_PREFIX}{error}"),
        Cell::Text(s) => s.clone(),
    }
}

fn parse_cell(s: &str) -> Cell {
    match s {
        "true" => Cell::Flag(true),
        "false" => Cell::Flag(false),
        _ => {
            if let Some(name) = s.strip_prefix(ERROR_PREFIX) {
                Cell::error(name)
            } else if let Ok(x) = s.parse::<f64>() {
                Cell::Number(x)
            } else {
                Cell::Text(s.to_string())
            }
        }
    }
}

pub fn to_csv(table: &SweepTable) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(render_cell)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn from_csv(text: &str) -> Result<SweepTable, csv::Error> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let mut table = SweepTable::new(columns);
    for rec in r.records() {
        table.rows.push(rec?.iter().map(parse_cell).collect());
    }
    Ok(table)
}

pub fn to_json(table: &SweepTable, meta: &Meta) -> String {
    let doc = JsonDocument {
        columns: table.columns.clone(),
        rows: table.rows.clone(),
        meta: meta.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("tables serialize");
    s.push('\n');
    s
}

pub fn render(table: &SweepTable, meta: &Meta, format: Format) -> String {
    match format {
        Format::Csv => to_csv(table),
        Format::Json => to_json(table, meta),
    }
}

/// `name_re`, `name_im`.
pub fn complex_columns(name: &str) -> [String; 2] {
    [format!("{name}_re"), format!("{name}_im")]
}

pub fn complex_cells(z: C64) -> [Cell; 2] {
    [Cell::number(z.re), Cell::number(z.im)]
}

pub fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::OutputIo {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_survive_a_csv_round_trip() {
        let mut t = SweepTable::new(vec!["x".into(), "ok".into(), "n".into(), "kind".into()]);
        t.rows.push(vec![Cell::number(0.1), Cell::Flag(true), Cell::error("UnstableSystem"), Cell::Text("squeezed".into())]);
        t.rows.push(vec![Cell::number(-1.234567890123456e-300), Cell::Flag(false), Cell::number(f64::MAX), Cell::Text("mixed".into())]);
        let text = to_csv(&t);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(text.lines().nth(1), Some("1.0000000000000001e-1,true,ERR:UnstableSystem,squeezed"));
        assert_eq!(from_csv(&text).unwrap(), t);
    }

    #[test]
    fn seventeen_digits_are_exact() {
        for x in [std::f64::consts::PI, 1e-7 / 3.0, 6.02214076e23, -0.0] {
            assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn json_documents_round_trip() {
        let mut t = SweepTable::new(vec!["a".into()]);
        t.rows.push(vec![Cell::number(2.5)]);
        let meta = Meta {
            schema_version: SCHEMA_VERSION,
            command: "steady".into(),
            git_describe: "x".into(),
            config: RunConfig::default_point(),
            extra: Default::default(),
        };
        let doc: JsonDocument = serde_json::from_str(&to_json(&t, &meta)).unwrap();
        assert_eq!(doc.rows, t.rows);
        assert_eq!(doc.meta, meta);
    }
}
