//! Report serialization. Floats are written with 17 significant digits so
//! that every value round-trips and repeated runs are byte-identical.

use std::str::FromStr;

use serde_json::{Map, Number, Value};

pub const SCHEMA: u64 = 1;

/// A float with 17 significant digits, or `null` when not finite.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&fmt_float(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One cell of a CSV table.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => fmt_float(*x),
            Cell::Num(_) => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Rows as JSON objects keyed by column name.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Output of one CLI run.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub json: Value,
    /// Tabular results (sweep rows).
    pub rows: Option<Table>,
    /// Function samples written beside the report.
    pub fn_dump: Option<Table>,
}

impl Report {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
        s.push('\n');
        s
    }

    /// Primary CSV view: sweep rows, else function samples, else the flat
    /// `results` object as key/value pairs.
    pub fn to_csv_string(&self) -> String {
        if let Some(t) = self.rows.as_ref().or(self.fn_dump.as_ref()) {
            return t.to_csv();
        }
        let mut out = String::from("key,value\n");
        if let Some(Value::Object(results)) = self.json.get("results") {
            flatten("", results, &mut out);
        }
        out
    }
}

fn flatten(prefix: &str, obj: &Map<String, Value>, out: &mut String) {
    for (k, v) in obj {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Object(inner) => flatten(&key, inner, out),
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    out.push_str(&format!("{key}[{i}],{item}\n"));
                }
            }
            Value::String(s) => out.push_str(&format!("{key},{s}\n")),
            other => out.push_str(&format!("{key},{other}\n")),
        }
    }
}
