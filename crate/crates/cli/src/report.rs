//! JSON report building. Keys keep insertion order so reports are
//! byte-stable; rationals are strings (`"-9/8"`), floats are numbers.

use serde_json::{json, Map, Value};

use polyham::{format_rational, Matrix, Rational, Signature};

pub type Report = Map<String, Value>;

pub fn new_report(command: &str) -> Report {
    let mut r = Map::new();
    r.insert("format".into(), json!(crate::gamefile::FORMAT_VERSION));
    r.insert("command".into(), json!(command));
    r
}

pub fn rat(v: &Rational) -> Value {
    Value::String(format_rational(v))
}

pub fn rats(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rat).collect())
}

pub fn rat_matrix(m: &Matrix<Rational>) -> Value {
    Value::Array((0..m.nrows()).map(|i| rats(m.row(i))).collect())
}

/// Non-finite values become `null`.
pub fn float(v: f64) -> Value {
    // `+ 0.0` folds -0.0 into 0.0
    serde_json::Number::from_f64(v + 0.0).map_or(Value::Null, Value::Number)
}

pub fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| float(x)).collect())
}

/// 1-based strategy indices.
pub fn strategies(indices: &[usize]) -> Value {
    Value::Array(indices.iter().map(|i| json!(i + 1)).collect())
}

pub fn signature(sig: &Signature) -> Value {
    json!(sig.parts())
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn inline_object(map: &Map<String, Value>) -> String {
    let parts: Vec<String> = map
        .iter()
        .map(|(k, v)| format!("{}: {v}", Value::String(k.clone())))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Array(items) if items.iter().all(is_scalar) => {
            let parts: Vec<String> = items.iter().map(Value::to_string).collect();
            out.push_str(&format!("[{}]", parts.join(", ")));
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad);
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&format!("{}]", "  ".repeat(indent)));
        }
        Value::Object(map) if map.values().all(is_scalar) && inline_object(map).len() <= 72 => {
            out.push_str(&inline_object(map));
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&format!("{pad}{}: ", Value::String(key.clone())));
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&format!("{}}}", "  ".repeat(indent)));
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

/// Pretty JSON with scalar arrays kept on one line, so matrices print one
/// row per line.
pub fn to_text(report: &Report) -> String {
    let mut s = String::new();
    write_value(&mut s, &Value::Object(report.clone()), 0);
    s.push('\n');
    s
}
