use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{Map, Number, Value};

use crate::cli::Format;
use crate::error::CliResult;

/// Twelve significant digits in lowercase scientific notation.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 {
        format!("{:.11e}", 0.0)
    } else {
        format!("{x:.11e}")
    }
}

fn json_number(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&sci(x)).expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Complex(Complex64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    fn json(&self) -> Value {
        match self {
            Cell::Real(x) => json_number(*x),
            Cell::Complex(c) => {
                let mut m = Map::new();
                m.insert("re".into(), json_number(c.re));
                m.insert("im".into(), json_number(c.im));
                Value::Object(m)
            }
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Missing => Value::Null,
        }
    }

    /// Flat text fields; complex values occupy two.
    fn fields(&self) -> Vec<String> {
        match self {
            Cell::Real(x) => vec![sci(*x)],
            Cell::Complex(c) => vec![sci(c.re), sci(c.im)],
            Cell::Int(n) => vec![n.to_string()],
            Cell::Bool(b) => vec![b.to_string()],
            Cell::Text(s) => vec![s.clone()],
            Cell::Missing => vec![String::new()],
        }
    }

    fn headers(&self, name: &str) -> Vec<String> {
        match self {
            Cell::Complex(_) => vec![format!("{name}_re"), format!("{name}_im")],
            _ => vec![name.to_string()],
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<Complex64> for Cell {
    fn from(c: Complex64) -> Self {
        Cell::Complex(c)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<i64> for Cell {
    fn from(n: i64) -> Self {
        Cell::Int(n)
    }
}

impl From<u32> for Cell {
    fn from(n: u32) -> Self {
        Cell::Int(i64::from(n))
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// Ordered `(name, value)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Fields(pub Vec<(String, Cell)>);

impl Fields {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<Cell>) -> Self {
        self.push(name, value);
        self
    }

    pub fn push(&mut self, name: &str, value: impl Into<Cell>) {
        self.0.push((name.to_string(), value.into()));
    }

    fn json(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.clone(), v.json())).collect())
    }

    fn headers(&self) -> Vec<String> {
        self.0.iter().flat_map(|(k, v)| v.headers(k)).collect()
    }

    fn row(&self) -> Vec<String> {
        self.0.iter().flat_map(|(_, v)| v.fields()).collect()
    }
}

/// Result of one invocation.
#[derive(Debug, Clone)]
pub struct Output {
    pub command: &'static str,
    pub method: String,
    pub inputs: Fields,
    pub tolerances: Fields,
    /// Scalar results.
    pub outputs: Fields,
    /// Per-item results, one record per row.
    pub records: Vec<Fields>,
    /// Checks that exceeded their tolerance.
    pub failures: Vec<String>,
}

impl Output {
    pub fn new(command: &'static str, method: impl Into<String>) -> Self {
        Self {
            command,
            method: method.into(),
            inputs: Fields::new(),
            tolerances: Fields::new(),
            outputs: Fields::new(),
            records: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn json(&self) -> Value {
        let mut outputs = match self.outputs.json() {
            Value::Object(m) => m,
            _ => unreachable!("fields serialise to an object"),
        };
        if !self.records.is_empty() {
            outputs.insert(
                "records".into(),
                Value::Array(self.records.iter().map(Fields::json).collect()),
            );
        }
        outputs.insert(
            "failures".into(),
            Value::Array(self.failures.iter().cloned().map(Value::String).collect()),
        );
        let mut versions = Map::new();
        versions.insert("heun-spectra".into(), Value::from(heun_spectra::VERSION));
        versions.insert("heun-spectra-cli".into(), Value::from(env!("CARGO_PKG_VERSION")));
        let mut top = Map::new();
        top.insert("command".into(), Value::from(self.command));
        top.insert("inputs".into(), self.inputs.json());
        top.insert("outputs".into(), Value::Object(outputs));
        top.insert("method".into(), Value::from(self.method.clone()));
        top.insert("tolerances".into(), self.tolerances.json());
        top.insert("versions".into(), Value::Object(versions));
        Value::Object(top)
    }

    /// Header and rows: the records, or the scalar outputs as a single row.
    fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        match self.records.first() {
            Some(first) => (first.headers(), self.records.iter().map(Fields::row).collect()),
            None => (self.outputs.headers(), vec![self.outputs.row()]),
        }
    }

    pub fn csv(&self) -> CliResult<Vec<u8>> {
        let (headers, rows) = self.table();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&headers).map_err(csv_error)?;
        for r in rows {
            w.write_record(&r).map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{} ({})\n", self.command, self.method));
        let pairs = |f: &Fields| -> Vec<(String, String)> {
            f.0.iter()
                .flat_map(|(k, v)| v.headers(k).into_iter().zip(v.fields()))
                .collect()
        };
        for (title, f) in [
            ("inputs", &self.inputs),
            ("outputs", &self.outputs),
            ("tolerances", &self.tolerances),
        ] {
            let p = pairs(f);
            if p.is_empty() {
                continue;
            }
            s.push_str(&format!("{title}:\n"));
            let width = p.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in p {
                s.push_str(&format!("  {k:<width$}  {v}\n"));
            }
        }
        if !self.records.is_empty() {
            let (headers, rows) = self.table();
            let widths: Vec<usize> = (0..headers.len())
                .map(|j| {
                    rows.iter()
                        .map(|r| r[j].len())
                        .chain([headers[j].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: &[String]| {
                let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                format!("  {}\n", padded.join("  "))
            };
            s.push_str("records:\n");
            s.push_str(&line(&headers));
            for r in &rows {
                s.push_str(&line(r));
            }
        }
        if !self.failures.is_empty() {
            s.push_str("failures:\n");
            for f in &self.failures {
                s.push_str(&format!("  {f}\n"));
            }
        }
        s
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        Ok(match format {
            Format::Text => self.text().into_bytes(),
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(&self.json()).expect("JSON values serialise");
                v.push(b'\n');
                v
            }
            Format::Csv => self.csv()?,
        })
    }
}

fn csv_error(e: csv::Error) -> crate::error::CliError {
    std::io::Error::other(e.to_string()).into()
}

pub fn write_to(bytes: &[u8], path: Option<&std::path::Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}
