//! Byte-stable number formatting and report assembly.

use serde_json::{Map, Value};

/// Rounds to 10 significant digits.
pub fn round10(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("formatted float")
}

/// Plain decimal rendering of [`round10`], never in exponent form.
pub fn decimal(x: f64) -> String {
    let r = round10(x);
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(round10(x)).map_or(Value::Null, Value::Number)
}

/// Keys come out sorted because `serde_json::Map` is ordered.
pub fn object<const N: usize>(fields: [(&str, Value); N]) -> Value {
    let mut m = Map::new();
    for (k, v) in fields {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

pub fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
