//! Byte-stable CSV and JSON documents.

use std::io::{self, Write};
use std::str::FromStr;

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Real)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetaValue {
    Text(String),
    Int(i64),
    Real(f64),
    Reals(Vec<f64>),
    Bool(bool),
}

/// 17 significant digits with a signed exponent (`1.5e+2`), independent of
/// locale. JSON numbers use the same text.
pub fn format_real(v: f64) -> String {
    let s = format!("{v:.16e}");
    match s.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => s,
    }
}

fn json_real(v: f64) -> Value {
    if v.is_finite() {
        Value::Number(Number::from_str(&format_real(v)).expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

impl MetaValue {
    fn csv(&self) -> String {
        match self {
            MetaValue::Text(s) => s.clone(),
            MetaValue::Int(i) => i.to_string(),
            MetaValue::Real(r) => format_real(*r),
            MetaValue::Reals(rs) => rs
                .iter()
                .map(|r| format_real(*r))
                .collect::<Vec<_>>()
                .join(" "),
            MetaValue::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            MetaValue::Text(s) => Value::String(s.clone()),
            MetaValue::Int(i) => Value::from(*i),
            MetaValue::Real(r) => json_real(*r),
            MetaValue::Reals(rs) => Value::Array(rs.iter().map(|r| json_real(*r)).collect()),
            MetaValue::Bool(b) => Value::Bool(*b),
        }
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(r) => format_real(*r),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Real(r) => json_real(*r),
            Cell::Missing => Value::Null,
        }
    }
}

/// Metadata followed by rows with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputDocument {
    pub meta: Vec<(String, MetaValue)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl OutputDocument {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: MetaValue) -> &mut Self {
        self.meta.push((key.to_string(), value));
        self
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Value {
        let meta: Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), v.json()))
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(row)
                        .map(|(c, cell)| (c.to_string(), cell.json()))
                        .collect(),
                )
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("meta".into(), Value::Object(meta));
        doc.insert("rows".into(), Value::Array(rows));
        Value::Object(doc)
    }

    pub fn emit(&self, format: Format, sink: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                for (k, v) in &self.meta {
                    writeln!(sink, "# {k}: {}", v.csv())?;
                }
                writeln!(sink, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(sink, "{}", line.join(","))?;
                }
            }
            Format::Json => {
                serde_json::to_writer(&mut *sink, &self.to_json())?;
                writeln!(sink)?;
            }
        }
        sink.flush()
    }
}
