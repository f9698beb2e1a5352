//! Machine-readable output: JSON objects with a fixed field order (one per
//! line) and CSV tables with a header row. All reals are printed with 17
//! significant digits so values round-trip exactly and identical runs are
//! byte-identical.

use std::fmt::Write as _;

/// A JSON value restricted to what the CLI emits.
#[derive(Debug, Clone)]
pub enum Value {
    Str(String),
    F64(f64),
    U64(u64),
    Bool(bool),
    Null,
    FloatArray(Vec<f64>),
    StrArray(Vec<String>),
}

impl Value {
    pub fn opt_f64(v: Option<f64>) -> Value {
        match v {
            Some(x) => Value::F64(x),
            None => Value::Null,
        }
    }

    pub fn opt_u64(v: Option<u64>) -> Value {
        match v {
            Some(x) => Value::U64(x),
            None => Value::Null,
        }
    }
}

/// 17-significant-digit scientific notation; exact round-trip for every
/// finite f64. Non-finite values map to null (JSON has no NaN/inf).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Str(s) => {
            out.push('"');
            out.push_str(&json_escape(s));
            out.push('"');
        }
        Value::F64(x) => out.push_str(&fmt_f64(*x)),
        Value::U64(x) => {
            let _ = write!(out, "{x}");
        }
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Null => out.push_str("null"),
        Value::FloatArray(xs) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&fmt_f64(*x));
            }
            out.push(']');
        }
        Value::StrArray(xs) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('"');
                out.push_str(&json_escape(x));
                out.push('"');
            }
            out.push(']');
        }
    }
}

/// An ordered JSON object. `finish` appends the seed / version / runtime
/// trailer in the documented order, with `runtime_ms` always last.
#[derive(Debug, Clone, Default)]
pub struct JsonObject {
    fields: Vec<(String, Value)>,
}

impl JsonObject {
    pub fn new(command: &str) -> Self {
        let mut o = JsonObject::default();
        o.push("command", Value::Str(command.to_string()));
        o
    }

    pub fn push(&mut self, key: &str, value: Value) -> &mut Self {
        self.fields.push((key.to_string(), value));
        self
    }

    /// Render as one line, appending the common trailer fields.
    pub fn finish_line(mut self, seed: u64, runtime_ms: u128) -> String {
        self.push("seed", Value::U64(seed));
        self.push(
            "version",
            Value::Str(env!("CARGO_PKG_VERSION").to_string()),
        );
        self.push("runtime_ms", Value::U64(runtime_ms as u64));
        self.render()
    }

    /// Render as one line without the trailer (for nested summaries).
    pub fn render(&self) -> String {
        let mut out = String::from("{");
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('"');
            out.push_str(&json_escape(k));
            out.push_str("\":");
            write_value(&mut out, v);
        }
        out.push('}');
        out
    }
}

/// Render a CSV cell for the given value (floats in the same 17-digit form).
pub fn csv_cell(v: &Value) -> String {
    match v {
        Value::Str(s) => s.clone(),
        Value::F64(x) => fmt_f64(*x),
        Value::U64(x) => x.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        Value::FloatArray(xs) => xs
            .iter()
            .map(|x| fmt_f64(*x))
            .collect::<Vec<_>>()
            .join(";"),
        Value::StrArray(xs) => xs.join(";"),
    }
}

/// Write rows (with a header) as CSV to stdout.
pub fn print_csv(header: &[&str], rows: &[Vec<Value>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(header)?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        w.write_record(&cells)?;
    }
    w.flush()
}
