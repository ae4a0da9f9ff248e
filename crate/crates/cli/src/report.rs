use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

use crate::config::{Command, Inputs};

pub const SCHEMA: u64 = 1;

/// Magnitudes below this are written as zero.
const CHOP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub inputs: Inputs,
    pub verdict: bool,
    pub details: Value,
    pub elapsed_ms: Option<u64>,
}

/// Rounds to 12 significant digits and chops tiny magnitudes.
pub fn round_float(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < CHOP {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(num) if num.is_f64() => {
            let x = round_float(num.as_f64().expect("f64 number"));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// SHA-256 of the compact, key-sorted inputs JSON.
pub fn inputs_digest(inputs: &Inputs) -> String {
    let text = serde_json::to_string(&serde_json::to_value(inputs).expect("inputs serialize"))
        .expect("json");
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

impl Report {
    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("schema".into(), SCHEMA.into());
        map.insert("command".into(), self.command.as_str().into());
        map.insert(
            "inputs".into(),
            serde_json::to_value(&self.inputs).expect("inputs serialize"),
        );
        map.insert("inputs_digest".into(), inputs_digest(&self.inputs).into());
        map.insert("verdict".into(), self.verdict.into());
        map.insert("details".into(), round_value(self.details.clone()));
        map.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        if let Some(ms) = self.elapsed_ms {
            map.insert("elapsed_ms".into(), ms.into());
        }
        Value::Object(map)
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        text.push('\n');
        text
    }

    /// One `key: value` line per scalar detail; lists are summarized by length.
    pub fn to_human(&self) -> String {
        let mut out = format!(
            "command: {}\nverdict: {}\n",
            self.command.as_str(),
            if self.verdict { "PASS" } else { "FAIL" }
        );
        if let Value::Object(map) = round_value(self.details.clone()) {
            for (k, v) in map {
                let shown = match v {
                    Value::Array(items) => format!("[{} items]", items.len()),
                    Value::Object(inner) if inner.len() > 4 => {
                        format!("{{{} entries}}", inner.len())
                    }
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                out.push_str(&format!("{k}: {shown}\n"));
            }
        }
        if let Some(ms) = self.elapsed_ms {
            out.push_str(&format!("elapsed_ms: {ms}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_float(1e-13), 0.0);
        assert_eq!(round_float(-3e-15), 0.0);
        assert_eq!(round_float(0.1 + 0.2), 0.3);
        assert_eq!(round_float(1.0 - 1e-14), 1.0);
        assert_eq!(round_float(123456789.1234567), 123456789.123);
        assert!(round_float(f64::INFINITY).is_infinite());
    }

    #[test]
    fn keys_are_sorted() {
        let inputs: Inputs = serde_json::from_str(
            r#"{"command":"canonicalize","n":1,"tol":1e-9,"seed":0,"group":["Z"]}"#,
        )
        .unwrap();
        let r = Report {
            command: Command::Canonicalize,
            inputs,
            verdict: true,
            details: serde_json::json!({"zeta": 1.0, "alpha": 2.0000000000000004}),
            elapsed_ms: None,
        };
        let text = r.to_json();
        let keys = [
            "command",
            "details",
            "inputs",
            "inputs_digest",
            "schema",
            "verdict",
            "version",
        ];
        let positions: Vec<usize> = keys
            .iter()
            .map(|k| text.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
        assert!(text.contains("\"alpha\": 2.0"));
        assert_eq!(text, r.to_json());
    }
}
