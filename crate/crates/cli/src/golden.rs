//! Golden-file comparison: strings (exact rationals), integers, booleans and
//! structure must match exactly; floats within a mixed tolerance.

use serde_json::Value;

pub const FLOAT_TOLERANCE: f64 = 1e-6;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Paths of every mismatch, empty when the documents agree.
pub fn compare(expected: &Value, actual: &Value, tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    walk(expected, actual, tol, "$", &mut out);
    out
}

fn walk(e: &Value, a: &Value, tol: f64, path: &str, out: &mut Vec<String>) {
    match (e, a) {
        (Value::Object(em), Value::Object(am)) => {
            let ek: Vec<_> = em.keys().collect();
            let ak: Vec<_> = am.keys().collect();
            if ek != ak {
                out.push(format!("{path}: keys {ek:?} vs {ak:?}"));
                return;
            }
            for (k, v) in em {
                walk(v, &am[k], tol, &format!("{path}.{k}"), out);
            }
        }
        (Value::Array(ev), Value::Array(av)) => {
            if ev.len() != av.len() {
                out.push(format!("{path}: length {} vs {}", ev.len(), av.len()));
                return;
            }
            for (i, (x, y)) in ev.iter().zip(av).enumerate() {
                walk(x, y, tol, &format!("{path}[{i}]"), out);
            }
        }
        (Value::Number(x), Value::Number(y)) if x.is_f64() || y.is_f64() => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if !close(x, y, tol) {
                out.push(format!("{path}: {x:e} vs {y:e}"));
            }
        }
        _ if e == a => {}
        _ => out.push(format!("{path}: {e} vs {a}")),
    }
}
