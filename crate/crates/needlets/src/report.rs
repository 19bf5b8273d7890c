//! Report documents: JSON, or the same tree as indented text with arrays of
//! records laid out as tables.

use std::fmt::Write;

use serde_json::{Map, Value};

use crate::config::ReportFormat;

pub fn extension(format: ReportFormat) -> &'static str {
    match format {
        ReportFormat::Json => "json",
        ReportFormat::Text => "txt",
    }
}

pub fn encode(document: &Value, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(document).expect("JSON values always serialize");
            s.push('\n');
            s
        }
        ReportFormat::Text => to_text(document),
    }
}

/// Finite floats as numbers, anything else as `null`.
pub fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn to_text(document: &Value) -> String {
    let mut out = String::new();
    match document {
        Value::Object(map) => write_object(&mut out, map, 0),
        other => {
            out.push_str(&scalar(other));
            out.push('\n');
        }
    }
    out
}

fn write_object(out: &mut String, map: &Map<String, Value>, depth: usize) {
    let indent = "  ".repeat(depth);
    let width = map.keys().map(|k| k.chars().count()).max().unwrap_or(0);
    for (key, value) in map {
        match value {
            Value::Object(inner) => {
                writeln!(out, "{indent}{key}:").unwrap();
                write_object(out, inner, depth + 1);
            }
            Value::Array(items) if !items.is_empty() && items.iter().all(Value::is_object) => {
                writeln!(out, "{indent}{key}:").unwrap();
                write_table(out, items, depth + 1);
            }
            other => writeln!(out, "{indent}{key:<width$}  {}", scalar(other)).unwrap(),
        }
    }
}

fn write_table(out: &mut String, rows: &[Value], depth: usize) {
    let indent = "  ".repeat(depth);
    let mut columns: Vec<&str> = Vec::new();
    for row in rows {
        for key in row.as_object().expect("rows are objects").keys() {
            if !columns.contains(&key.as_str()) {
                columns.push(key);
            }
        }
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|row| columns.iter().map(|c| row.get(*c).map(scalar).unwrap_or_default()).collect())
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].chars().count()).chain([c.chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |out: &mut String, items: Vec<&str>| {
        let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        writeln!(out, "{indent}{}", padded.join("  ").trim_end()).unwrap();
    };
    line(out, columns.clone());
    for row in &cells {
        line(out, row.iter().map(String::as_str).collect());
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(", "),
        Value::Object(_) => value.to_string(),
        Value::Bool(_) | Value::Number(_) => value.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn text_layout() {
        let doc = json!({
            "passed": true,
            "decay": {"order": 2, "constants": [1.0, 2.5]},
            "levels": [{"level": 0, "nodes": 2}, {"level": 10, "nodes": 2097152}],
            "missing": null,
        });
        let text = to_text(&doc);
        assert_eq!(
            text,
            "decay:\n  constants  1.0, 2.5\n  order      2\nlevels:\n  level    nodes\n      0        2\n     10  2097152\nmissing  -\npassed   true\n"
        );
    }

    #[test]
    fn non_finite_numbers_become_null() {
        assert_eq!(number(f64::INFINITY), Value::Null);
        assert_eq!(number(0.25), json!(0.25));
        assert!(encode(&json!({"a": 1}), ReportFormat::Json).ends_with("}\n"));
    }
}
