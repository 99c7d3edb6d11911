//! Stable content hashing for pages, curves, and words.
//!
//! Hashes are SHA-256 over a canonical JSON rendering: object keys sorted,
//! no insignificant whitespace, integers only (the engine never hashes
//! floats). Two structurally equal values therefore always hash alike,
//! independent of field order in the source.

use serde_json::Value;
use sha2::{Digest, Sha256};

/// Renders `value` canonically (sorted keys, compact) and returns the
/// lowercase hex SHA-256 digest of the rendering.
pub fn canonical_json_sha256(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    let mut hasher = Sha256::new();
    hasher.update(out.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&n.to_string()),
        Value::String(s) => {
            // serde_json's string escaping is deterministic.
            out.push_str(&serde_json::to_string(s).expect("string serialization cannot fail"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("string serialization cannot fail"));
                out.push(':');
                write_canonical(&map[*key], out);
            }
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_order_does_not_affect_hash() {
        let a = json!({"b": 1, "a": [2, 3]});
        let b = json!({"a": [2, 3], "b": 1});
        assert_eq!(canonical_json_sha256(&a), canonical_json_sha256(&b));
    }

    #[test]
    fn distinct_values_hash_differently() {
        let a = json!({"a": 1});
        let b = json!({"a": 2});
        assert_ne!(canonical_json_sha256(&a), canonical_json_sha256(&b));
    }

    #[test]
    fn hash_is_hex_of_expected_length() {
        let h = canonical_json_sha256(&json!(null));
        assert_eq!(h.len(), 64);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
    }
}
