//! Indented plain-text view of a JSON value. Scalar arrays stay on one line.

use serde_json::Value;

pub fn render(v: &Value) -> String {
    let mut out = String::new();
    walk(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|i| !i.is_array() && !i.is_object()),
        Value::Object(_) => false,
        _ => true,
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::Array(items) => format!("[{}]", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        other => scalar(other),
    }
}

fn walk(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                if is_flat(child) {
                    out.push_str(&format!("{pad}{k}: {}\n", inline(child)));
                } else {
                    out.push_str(&format!("{pad}{k}:\n"));
                    walk(child, depth + 1, out);
                }
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                if is_flat(child) {
                    out.push_str(&format!("{pad}- {}\n", inline(child)));
                } else {
                    out.push_str(&format!("{pad}[{i}]\n"));
                    walk(child, depth + 1, out);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested_values() {
        let v = json!({"a": 1, "b": {"c": [1, 2], "d": null}, "e": [{"f": "x"}]});
        assert_eq!(render(&v), "a: 1\nb:\n  c: [1, 2]\n  d: -\ne:\n  [0]\n    f: x\n");
    }
}
