use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `v` rounded to twelve significant digits.
pub fn sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

pub fn fmt_sig(v: f64) -> String {
    let r = sig(v);
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

/// Rounds every float in a JSON tree to twelve significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(sig(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub parameters: Value,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Manifest {
    pub fn new(command: &str, parameters: Value) -> Self {
        Self {
            tool: "tomo",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            parameters,
            warnings: Vec::new(),
            wall_time_ms: None,
        }
    }
}

/// Stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, contents),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()
        }
    }
}

/// A JSON document `{"manifest": …, …body}` with rounded floats.
pub fn json_document(manifest: &Manifest, body: Value) -> String {
    let mut doc = json!({ "manifest": manifest });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    round_json(&mut doc);
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON value serializes");
    s.push('\n');
    s
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn csv_string(header: &[String], rows: &[Vec<String>]) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_sig((-1f64).exp()), "0.367879441171");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-0.1 / 0.81), "-0.123456790123");
        assert_eq!(sig(1.234_567_890_123_456e-20), 1.234_567_890_12e-20);
    }

    #[test]
    fn rounding_walks_nested_values() {
        let mut v = json!({"a": [0.1234567890123456, 3], "b": {"c": 2.0f64 / 3.0}});
        round_json(&mut v);
        assert_eq!(v["a"][0], json!(0.123456789012));
        assert_eq!(v["a"][1], json!(3));
        assert_eq!(v["b"]["c"], json!(0.666666666667));
    }
}
