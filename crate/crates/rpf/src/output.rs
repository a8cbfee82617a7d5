//! JSON and CSV emission. Every float is written with 17 significant digits
//! so that it parses back to the same `f64`.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::CliError;

/// `1.2345678901234567e0`-style float text; non-finite values become
/// `NaN`, `inf` or `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Pretty JSON with 17-significant-digit floats (non-finite → `null`).
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Io(format!("json encoding: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

/// A numeric table with named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|x| fmt_f64(*x)))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Table, CliError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| CliError::Input(format!("bad number {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }
}

/// What a subcommand produced.
#[derive(Clone, Debug)]
pub enum Output {
    Json(String),
    Csv(Table),
    Text(String),
    /// A JSON summary plus a curve. With `--out` the curve goes to the file
    /// and the summary to stdout; otherwise both go to stdout separated by a
    /// blank line.
    JsonAndCsv(String, Table),
}

/// Writes `out` to `path` (if given) or to `stdout`.
pub fn emit(out: &Output, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let write_file = |text: &str, p: &Path| -> Result<(), CliError> {
        std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    };
    match (out, path) {
        (Output::Json(s) | Output::Text(s), Some(p)) => write_file(s, p),
        (Output::Json(s) | Output::Text(s), None) => Ok(stdout.write_all(s.as_bytes())?),
        (Output::Csv(t), Some(p)) => write_file(&t.to_csv()?, p),
        (Output::Csv(t), None) => Ok(stdout.write_all(t.to_csv()?.as_bytes())?),
        (Output::JsonAndCsv(j, t), Some(p)) => {
            stdout.write_all(j.as_bytes())?;
            write_file(&t.to_csv()?, p)
        }
        (Output::JsonAndCsv(j, t), None) => {
            stdout.write_all(j.as_bytes())?;
            stdout.write_all(b"\n")?;
            Ok(stdout.write_all(t.to_csv()?.as_bytes())?)
        }
    }
}
