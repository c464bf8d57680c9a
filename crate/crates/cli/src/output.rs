//! Report emission. Floats carry 17 significant digits so that re-reading
//! any emitted value reproduces it bit for bit.

use std::fmt::Write as _;
use std::io::Write;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut out = String::new();
            write_json(value, 0, &mut out);
            out.push('\n');
            out
        }
        Format::Csv => render_csv(value),
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // JSON has no literal for these
        "null".to_string()
    }
}

fn format_number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        format_float(n.as_f64().expect("f64 number"))
    } else {
        n.to_string()
    }
}

fn write_json(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    match value {
        Value::Number(n) => out.push_str(&format_number(n)),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_json(item, indent, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                write_json(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", "  ".repeat(indent));
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                let _ = write!(out, "{pad}{}: ", Value::String(key.clone()));
                write_json(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", "  ".repeat(indent));
        }
        other => out.push_str(&other.to_string()),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Two columns, `key` and `value`, one row per leaf; nested keys are joined
/// with `.` and array positions appear as `[i]`.
fn render_csv(value: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["key", "value"])
        .expect("write to memory");
    for (key, val) in rows {
        writer.write_record([key, val]).expect("write to memory");
    }
    writer.flush().expect("flush to memory");
    String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (key, item) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(&path, item, rows);
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), item, rows);
            }
        }
        Value::Number(n) => rows.push((prefix.to_string(), format_number(n))),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
    }
}

pub fn emit(text: &str, out: Option<&std::path::Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            24.0 / 49.0,
            1.0 / 3.0,
            5e-324,
            1.7976931348623157e308,
            0.0,
        ] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn json_is_valid_and_keeps_integers() {
        let v = json!({"a": 1, "b": [0.5, 0.25], "c": {"d": "24/49", "e": null}, "f": []});
        let text = render(&v, Format::Json);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"], json!(1));
        assert_eq!(back["b"][1].as_f64(), Some(0.25));
        assert_eq!(back["c"]["d"], json!("24/49"));
        assert!(text.contains("5.0000000000000000e-1"));
    }

    #[test]
    fn csv_flattens_leaves() {
        let v = json!({"x": [1, 2], "y": {"z": true}});
        assert_eq!(
            render(&v, Format::Csv),
            "key,value\nx[0],1\nx[1],2\ny.z,true\n"
        );
    }
}
