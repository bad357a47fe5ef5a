//! Deterministic JSON and CSV emitters. Every float is written as `{:.16e}`
//! (17 significant digits) in both formats.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qgeo::tensor::Tensor3;
use qgeo::{CMat, CVec, RMat, C64};
use serde_json::{json, Value};

use crate::args::{Format, Global};
use crate::error::{io_error, CliError};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    serde::Serialize::serialize(value, &mut ser).expect("serializing a JSON value cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Non-finite values have no JSON representation and become `null`.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn reals(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

pub fn rmat(m: &RMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn cmat(m: &CMat) -> Value {
    json!({ "re": rmat(&m.map(|z| z.re)), "im": rmat(&m.map(|z| z.im)) })
}

pub fn cvec(v: &CVec) -> Value {
    json!({
        "re": Value::Array(v.iter().map(|z| num(z.re)).collect()),
        "im": Value::Array(v.iter().map(|z| num(z.im)).collect()),
    })
}

fn tensor3_part(t: &Tensor3<C64>, f: impl Fn(&C64) -> f64 + Copy) -> Value {
    let n = t.dim();
    Value::Array(
        (0..n)
            .map(|a| {
                Value::Array(
                    (0..n)
                        .map(|b| Value::Array((0..n).map(|c| num(f(&t[(a, b, c)]))).collect()))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn ctensor3(t: &Tensor3<C64>) -> Value {
    json!({ "re": tensor3_part(t, |z| z.re), "im": tensor3_part(t, |z| z.im) })
}

/// Plain rows with a header line.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row.into_iter().map(fmt_f64).collect());
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Usage(format!("csv writer: {e}")))?;
        Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
    }
}

/// Output format from the flags, else from the extension of `out`, else JSON.
pub fn resolve_format(global: &Global, out: Option<&Path>) -> Format {
    if global.csv {
        return Format::Csv;
    }
    if let Some(f) = global.format {
        return f;
    }
    match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
        _ => Format::Json,
    }
}

/// Write to `out` or stdout.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| io_error(p, e))?;
            log::info!("wrote {}", p.display());
            Ok(())
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

pub fn emit_value(
    global: &Global,
    out: Option<&PathBuf>,
    value: &Value,
    table: impl FnOnce() -> Table,
) -> Result<(), CliError> {
    let text = match resolve_format(global, out.map(PathBuf::as_path)) {
        Format::Json => to_json_string(value),
        Format::Csv => table().to_csv()?,
    };
    emit(out, &text)
}
