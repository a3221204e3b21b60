use std::process::{Command, Output};

use serde_json::Value;
use sumset_core::search::{RatioHistogram, SearchOutcome};
use sumset_core::{StructureReport, SweepSummary};

fn sumset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumset")).args(args).output().expect("binary runs")
}

fn envelope(args: &[&str]) -> (i32, Value) {
    let out = sumset(args);
    let text = String::from_utf8(out.stdout).unwrap();
    let value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    (out.status.code().unwrap(), value)
}

fn schema() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report-schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Checks `required`, `type`, `enum`, `const`, nested `properties`, `items`,
/// `additionalProperties`, `oneOf`, `$ref` and the `if`/`then` blocks of `allOf`.
fn conforms(root: &Value, schema: &Value, v: &Value, path: &str) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.trim_start_matches("#/$defs/");
        return conforms(root, &root["$defs"][name], v, path);
    }
    if let Some(options) = schema.get("oneOf").and_then(Value::as_array) {
        let hits = options.iter().filter(|o| conforms(root, o, v, path).is_ok()).count();
        if hits != 1 {
            return Err(format!("{path}: matches {hits} oneOf branches"));
        }
    }
    if let Some(c) = schema.get("const") {
        if c != v {
            return Err(format!("{path}: expected {c}, got {v}"));
        }
    }
    if let Some(e) = schema.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            return Err(format!("{path}: {v} not in enum"));
        }
    }
    if let Some(t) = schema.get("type") {
        let names: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = names.iter().any(|n| match *n {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{path}: {v} is not {names:?}"));
        }
    }
    if let Some(obj) = v.as_object() {
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().unwrap();
            if !obj.contains_key(key) {
                return Err(format!("{path}: missing `{key}`"));
            }
        }
        if let Some(props) = schema.get("properties").and_then(Value::as_object) {
            for (k, sub) in props {
                if let Some(child) = obj.get(k) {
                    conforms(root, sub, child, &format!("{path}.{k}"))?;
                }
            }
        }
        if let Some(extra) = schema.get("additionalProperties").filter(|e| e.is_object()) {
            for (k, child) in obj {
                conforms(root, extra, child, &format!("{path}.{k}"))?;
            }
        }
        for rule in schema.get("allOf").and_then(Value::as_array).into_iter().flatten() {
            if conforms(root, &rule["if"], v, path).is_ok() {
                conforms(root, &rule["then"], v, path)?;
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, child) in arr.iter().enumerate() {
            conforms(root, items, child, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

fn assert_schema(v: &Value) {
    let root = schema();
    if let Err(e) = conforms(&root, &root, v, "$") {
        panic!("{e}");
    }
}

#[test]
fn analyze_report_round_trips() {
    let (code, v) = envelope(&["analyze", "0-12,45,57"]);
    assert_eq!(code, 0);
    assert_schema(&v);
    assert_eq!(v["command"], "analyze");
    assert_eq!(v["input"]["analyze"]["set"], "0-12,45,57");
    let report: StructureReport = serde_json::from_value(v["report"].clone()).unwrap();
    assert_eq!((report.stats.k, report.stats.deficiency_b), (15, 11));
    assert_eq!(report.bp.as_ref().unwrap().total_length, 26);
    assert_eq!(serde_json::to_value(&report).unwrap(), v["report"]);
}

#[test]
fn analyze_interval_and_blocks() {
    let (_, v) = envelope(&["analyze", "0-4"]);
    assert_eq!(v["report"]["stats"]["deficiency_b"], -3);
    assert_eq!(v["report"]["ap"]["length"], 5);
    assert_eq!(v["report"]["verdicts"]["main"]["applicable"], false);
    let (_, v) = envelope(&["analyze", "0,1,2,20-22,40-42"]);
    assert!(v["report"]["bp"].is_null());
    assert_eq!(v["report"]["ap"]["length"], 43);
}

#[test]
fn pretty_is_a_view_of_the_json() {
    let out = sumset(&["analyze", "0-4", "--pretty"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command: analyze\n"));
    assert!(text.contains("deficiency_b: -3"));
    assert!(text.contains("tool: sumset"));
}

#[test]
fn parse_errors_exit_2() {
    let out = sumset(&["analyze", "0,,3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("byte"));
    assert_eq!(sumset(&["analyze", "5-3"]).status.code(), Some(2));
    assert_eq!(sumset(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sumset(&["verify", "--max-span", "8", "--claims", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_sweep_and_exit_codes() {
    let (code, v) = envelope(&["verify", "--max-span", "10", "--workers", "2"]);
    assert_eq!(code, 0);
    assert_schema(&v);
    let summary: SweepSummary = serde_json::from_value(v["report"].clone()).unwrap();
    assert_eq!(summary.sets_examined, 528);
    assert_eq!(serde_json::to_value(&summary).unwrap(), v["report"]);

    // Small sets routinely escape the weak claim, which only speaks about large ones.
    let (code, v) = envelope(&["verify", "--max-span", "12", "--claims", "weak"]);
    assert_eq!(code, 1);
    assert!(!v["report"]["claims"][0]["violations"].as_array().unwrap().is_empty());

    let out = sumset(&["verify", "--max-span", "14", "--max-sets", "10"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn search_outputs() {
    let (code, v) = envelope(&["search", "--k", "6", "--max-span", "20"]);
    assert_eq!(code, 0);
    assert_schema(&v);
    let out: SearchOutcome = serde_json::from_value(v["report"].clone()).unwrap();
    assert_eq!(out.min_b, Some(0));
    assert!(out.records.iter().all(|r| r.frontier && !r.applicable));

    let lines = sumset(&["search", "--k", "6", "--max-span", "20", "--jsonl"]);
    let text = String::from_utf8(lines.stdout).unwrap();
    assert_eq!(text.lines().count(), out.records.len());
    for (line, rec) in text.lines().zip(&out.records) {
        assert_eq!(serde_json::from_str::<Value>(line).unwrap(), serde_json::to_value(rec).unwrap());
    }
}

#[test]
fn cover_and_iso() {
    let (_, v) = envelope(&["cover", "0,3,6,1,4", "--budget", "4"]);
    assert_eq!(v["report"]["bp"]["total_length"], 5);
    assert!(v["report"]["bp_within_budget"].is_null());
    let (_, v) = envelope(&["iso", "embed", "0,1,3,4,6"]);
    assert_eq!(v["report"]["is_f2_isomorphism"], true);
    assert_eq!(v["report"]["doubling"], v["report"]["image_doubling"]);
    let (_, v) = envelope(&["iso", "rank", "--x0", "0", "--x1", "1", "--x2", "10", "--b1", "3", "--b2", "2"]);
    assert_eq!(v["report"]["rank"], "two");
    let (_, v) = envelope(&["iso", "map", "--from", "0,1,3", "--to", "0,1,2"]);
    assert_eq!(v["report"]["is_f2_isomorphism"], false);
    assert_eq!(sumset(&["iso", "embed", "0,1,2,20-22,40-42"]).status.code(), Some(2));
}

#[test]
fn examples_table_and_members() {
    let (code, v) = envelope(&["examples", "--max-span", "200"]);
    assert_eq!(code, 0);
    let rows = v["report"]["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["matches"] == true));
    let (_, v) = envelope(&["examples", "--family", "ex15", "--k", "16"]);
    assert_eq!(v["report"]["literal"], "0-13,26,52");
    assert_eq!(sumset(&["examples", "--family", "ex16", "--k", "14"]).status.code(), Some(2));
}

#[test]
fn histogram_json_and_csv() {
    let (_, v) = envelope(&["histogram", "--max-span", "8"]);
    assert_schema(&v);
    let h: RatioHistogram = serde_json::from_value(v["report"].clone()).unwrap();
    let out = sumset(&["histogram", "--max-span", "8", "--csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("num,den,ratio,total,structured,unstructured\n"));
    assert_eq!(csv.lines().count(), h.buckets.len() + 1);
}
