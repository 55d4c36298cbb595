//! Machine-readable run reports.
//!
//! Reports are trees of [`Value`]s with insertion-ordered maps, so the same
//! run always serializes to the same bytes. Numbers are printed with
//! [`fmt_g17`], which round-trips every finite f64 exactly; non-finite values
//! become the JSON strings "NaN", "Infinity" and "-Infinity" rather than
//! invalid tokens. The CSV form flattens the tree into dotted paths, one
//! scalar leaf per row, with no header.

use std::fmt::Write as _;

/// A JSON-like value with deterministic map ordering.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Num(f64),
    Bool(bool),
    List(Vec<Value>),
    Map(Vec<(String, Value)>),
}

impl Value {
    pub fn map() -> Value {
        Value::Map(Vec::new())
    }

    /// Insert into a map value, replacing any existing entry with the key.
    pub fn set(&mut self, key: &str, value: Value) {
        if let Value::Map(entries) = self {
            if let Some(slot) = entries.iter_mut().find(|(k, _)| k == key) {
                slot.1 = value;
            } else {
                entries.push((key.to_string(), value));
            }
        } else {
            panic!("set called on a non-map value");
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        match self {
            Value::Map(entries) => entries.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Value {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Value {
        Value::Str(s)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Value {
        Value::Num(x)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Value {
        Value::Int(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Value {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Value {
        Value::Bool(x)
    }
}

impl From<&[f64]> for Value {
    fn from(xs: &[f64]) -> Value {
        Value::List(xs.iter().map(|&x| Value::Num(x)).collect())
    }
}

/// The top-level report: an ordered map with convenience pushes.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub entries: Vec<(String, Value)>,
}

impl RunReport {
    pub fn new() -> RunReport {
        RunReport::default()
    }

    pub fn push(&mut self, key: &str, value: Value) {
        self.entries.push((key.to_string(), value));
    }

    pub fn to_json(&self) -> String {
        let root = Value::Map(self.entries.clone());
        let mut out = String::new();
        write_json(&root, 0, &mut out);
        out.push('\n');
        out
    }

    /// Flatten to header-less CSV: one `path,value` row per scalar leaf.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.entries {
            flatten_csv(key, value, &mut out);
        }
        out
    }
}

/// Shortest exact decimal for a finite f64 (17 significant digits).
pub fn fmt_g17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Human-facing significant-digit formatting (no exponent unless needed).
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{}", x);
    }
    let magnitude = x.abs().log10().floor() as i32;
    if magnitude < -4 || magnitude >= digits as i32 + 2 {
        let s = format!("{:.*e}", digits.saturating_sub(1), x);
        return trim_exp(&s);
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn trim_exp(s: &str) -> String {
    // "1.200000e-5" → "1.2e-5"
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let m = if mantissa.contains('.') {
                mantissa.trim_end_matches('0').trim_end_matches('.')
            } else {
                mantissa
            };
            format!("{}e{}", m, exp)
        }
        None => s.to_string(),
    }
}

/// FNV-1a 64-bit digest of a byte stream.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn write_json(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Str(s) => write_json_string(s, out),
        Value::Int(i) => {
            let _ = write!(out, "{}", i);
        }
        Value::Num(x) => {
            if x.is_nan() {
                out.push_str("\"NaN\"");
            } else if x.is_infinite() {
                out.push_str(if *x > 0.0 { "\"Infinity\"" } else { "\"-Infinity\"" });
            } else {
                let _ = write!(out, "{}", fmt_g17(*x));
            }
        }
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::List(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(indent + 1, out);
                write_json(item, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Map(entries) => {
            if entries.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (key, item)) in entries.iter().enumerate() {
                pad(indent + 1, out);
                write_json_string(key, out);
                out.push_str(": ");
                write_json(item, indent + 1, out);
                if i + 1 < entries.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn pad(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn write_json_string(s: &str, out: &mut String) {
    out.push('"');
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
    out.push('"');
}

fn flatten_csv(path: &str, value: &Value, out: &mut String) {
    match value {
        Value::Str(s) => {
            let _ = writeln!(out, "{},{}", csv_field(path), csv_field(s));
        }
        Value::Int(i) => {
            let _ = writeln!(out, "{},{}", csv_field(path), i);
        }
        Value::Num(x) => {
            let rendered = if x.is_nan() {
                "NaN".to_string()
            } else if x.is_infinite() {
                if *x > 0.0 { "Infinity".to_string() } else { "-Infinity".to_string() }
            } else {
                fmt_g17(*x)
            };
            let _ = writeln!(out, "{},{}", csv_field(path), rendered);
        }
        Value::Bool(b) => {
            let _ = writeln!(out, "{},{}", csv_field(path), b);
        }
        Value::List(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten_csv(&format!("{}.{}", path, i), item, out);
            }
        }
        Value::Map(entries) => {
            for (key, item) in entries {
                flatten_csv(&format!("{}.{}", path, key), item, out);
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips_awkward_floats() {
        for x in [0.1, 1.0 / 3.0, 2.0_f64.powi(-52), 6.02214076e23, -0.0255] {
            let back: f64 = fmt_g17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn json_is_valid_and_ordered() {
        let mut report = RunReport::new();
        report.push("tool", Value::from("demo"));
        let mut fit = Value::map();
        fit.set("b", Value::from(0.0255));
        fit.set("converged", Value::from(true));
        report.push("fit", fit);
        report.push("rates", Value::from(&[0.1, f64::NAN][..]));

        let text = report.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["tool"], "demo");
        assert_eq!(parsed["rates"][1], "NaN");
        // Insertion order is preserved verbatim.
        let tool_at = text.find("\"tool\"").unwrap();
        let fit_at = text.find("\"fit\"").unwrap();
        assert!(tool_at < fit_at);
    }

    #[test]
    fn map_set_replaces_in_place() {
        let mut m = Value::map();
        m.set("a", Value::from(1.0));
        m.set("b", Value::from(2.0));
        m.set("a", Value::from(3.0));
        assert_eq!(m.get("a"), Some(&Value::Num(3.0)));
        if let Value::Map(entries) = &m {
            assert_eq!(entries.len(), 2);
            assert_eq!(entries[0].0, "a");
        }
    }

    #[test]
    fn csv_flattens_to_scalar_leaves() {
        let mut report = RunReport::new();
        let mut inner = Value::map();
        inner.set("alpha", Value::from(0.75));
        inner.set("note", Value::from("a,b"));
        report.push("model", inner);
        report.push("years", Value::List(vec![Value::Int(1899), Value::Int(1900)]));

        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], format!("model.alpha,{}", fmt_g17(0.75)));
        assert_eq!(lines[1], "model.note,\"a,b\"");
        assert_eq!(lines[2], "years.0,1899");
    }

    #[test]
    fn sig_formatting_stays_humane() {
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(1234.5678, 6), "1234.57");
        assert_eq!(fmt_sig(0.0255, 3), "0.0255");
        assert_eq!(fmt_sig(1.5e-7, 4), "1.5e-7");
        assert_eq!(fmt_sig(100.0, 6), "100");
    }

    #[test]
    fn fnv_matches_known_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }
}
