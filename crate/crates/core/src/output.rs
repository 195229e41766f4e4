//! Text serialization shared by the CSV and JSON writers.
//!
//! Floats are always written with 17 significant digits in scientific
//! notation so files round-trip exactly and are byte-stable across runs.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::scalar::{to_f64, Real};

pub fn float17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_owned()
    } else if x > 0.0 {
        "inf".to_owned()
    } else {
        "-inf".to_owned()
    }
}

pub fn real17<T: Real>(x: T) -> String {
    float17(to_f64(x))
}

/// Joins already formatted cells into one CSV line (no trailing newline).
/// Cells containing a comma, quote or line break are quoted.
pub fn csv_row<I, S>(cells: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut line = String::new();
    for (i, c) in cells.into_iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let c = c.as_ref();
        if c.contains([',', '"', '\n', '\r']) {
            line.push('"');
            line.push_str(&c.replace('"', "\"\""));
            line.push('"');
        } else {
            line.push_str(c);
        }
    }
    line
}

/// Pretty JSON with every non-integer number printed by [`float17`].
/// Non-finite floats become `null`.
pub fn to_json<S: Serialize + ?Sized>(value: &S) -> String {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n("  ", n));
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&float17(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(float17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float17(1.0), "1.0000000000000000e0");
        assert_eq!(float17(f64::NAN), "nan");
    }

    #[test]
    fn json_keeps_integers_and_formats_floats() {
        #[derive(Serialize)]
        struct S {
            n: usize,
            x: f64,
            v: Vec<f32>,
            s: &'static str,
            o: Option<f64>,
        }
        let text = to_json(&S { n: 3, x: 0.5, v: vec![], s: "a\"b", o: None });
        assert!(text.contains("\"n\": 3,"));
        assert!(text.contains("\"x\": 5.0000000000000000e-1"));
        assert!(text.contains("\"v\": []"));
        assert!(text.contains(r#""s": "a\"b""#));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.5));
        assert!(back["o"].is_null());
    }

    #[test]
    fn csv_rows() {
        assert_eq!(csv_row(["a", "b"]), "a,b");
        assert_eq!(csv_row(Vec::<String>::new()), "");
        assert_eq!(csv_row(["x", "a, \"b\""]), "x,\"a, \"\"b\"\"\"");
    }
}
