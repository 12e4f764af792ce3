//! Number formatting and JSON/CSV emission.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Significant digits used unless configured otherwise.
pub const DEFAULT_PRECISION: usize = 12;

/// Scientific notation with `digits` significant digits and a signed
/// two-digit exponent, e.g. `2.14596600000e+00`. Non-finite values print as
/// `inf`, `-inf` or `nan`.
pub fn format_number(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let raw = format!("{:.*e}", digits.max(1) - 1, x);
    let (mantissa, exp) = raw.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn write_value(out: &mut String, v: &Value, digits: usize, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat("  ").take(n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => write!(out, "{u}").unwrap(),
            (_, Some(i), _) => write!(out, "{i}").unwrap(),
            (_, _, Some(f)) => out.push_str(&format_number(f, digits)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, digits, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_value(out, item, digits, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty JSON with floats at `digits` significant digits. Non-finite floats
/// become `null`.
pub fn to_json<T: Serialize>(value: &T, digits: usize) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Invariant(format!("serialization failed: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &v, digits, 0);
    out.push('\n');
    Ok(out)
}

/// One CSV cell.
pub enum Cell {
    Num(f64),
    Int(u64),
    Flag(bool),
    /// Absent optional number, printed as `nan`.
    Missing,
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Missing, Cell::Num)
    }

    fn render(&self, digits: usize) -> String {
        match self {
            Cell::Num(x) => format_number(*x, digits),
            Cell::Int(i) => i.to_string(),
            Cell::Flag(b) => b.to_string(),
            Cell::Missing => "nan".into(),
        }
    }
}

/// Header plus rows, comma separated, LF terminated.
pub fn to_csv(header: &[&str], rows: &[Vec<Cell>], digits: usize) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.render(digits)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
