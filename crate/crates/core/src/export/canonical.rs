//! Canonical JSON lines: sorted keys, floats fixed at six decimals,
//! integers verbatim, no insignificant whitespace.

use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const FLOAT_DECIMALS: usize = 6;

fn write_value(out: &mut String, v: &Value) -> Result<()> {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let f = n.as_f64().unwrap_or_default();
                if !f.is_finite() {
                    return Err(Error::InvalidArgument("non-finite float".into()));
                }
                // Avoid "-0.000000" so equal values always print equal.
                let f = if f == 0.0 { 0.0 } else { f };
                let s = format!("{f:.prec$}", prec = FLOAT_DECIMALS);
                out.push_str(if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
                    "0.000000"
                } else {
                    &s
                });
            } else {
                write!(out, "{n}").expect("write to String");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s)?),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item)?;
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k)?);
                out.push(':');
                write_value(out, &map[k])?;
            }
            out.push('}');
        }
    }
    Ok(())
}

/// One canonical JSON document without a trailing newline.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v)?;
    Ok(out)
}

/// Records as canonical JSONL, each line newline-terminated.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&to_canonical_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses JSONL, skipping blank lines. Errors name the 1-based line.
pub fn from_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::InvalidArgument(format!("line {}: {e}", i + 1)))
        })
        .collect()
}
