//! Plain-text rendering of command results.

use serde_json::Value;

pub fn text(v: &Value) -> String {
    let mut out = String::new();
    write(&mut out, "", v, 0);
    out
}

fn write(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) if is_matrix(v) => {
            out.push_str(&format!("{pad}{key}:\n"));
            let n = map["n"].as_u64().unwrap_or(0) as usize;
            let data = map["data"].as_array().cloned().unwrap_or_default();
            for row in data.chunks(n.max(1)) {
                let cells: Vec<String> = row.iter().map(complex).collect();
                out.push_str(&format!("{pad}  [{}]\n", cells.join(", ")));
            }
        }
        Value::Object(map) if is_check(v) => {
            let verdict = if map["pass"] == Value::Bool(true) { "ok" } else { "FAILED" };
            out.push_str(&format!(
                "{pad}{key}: {verdict} (residual {}, bound {})\n",
                scalar(&map["residual"]),
                scalar(&map["bound"])
            ));
        }
        Value::Object(map) => {
            if !key.is_empty() {
                out.push_str(&format!("{pad}{key}:\n"));
            }
            let depth = if key.is_empty() { depth } else { depth + 1 };
            for (k, child) in map {
                write(out, k, child, depth);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object()) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for item in items {
                write(out, "-", item, depth + 1);
            }
        }
        _ => out.push_str(&format!("{pad}{key}: {}\n", scalar(v))),
    }
}

fn is_matrix(v: &Value) -> bool {
    v.get("n").is_some() && v.get("data").is_some() && v.as_object().is_some_and(|m| m.len() == 2)
}

fn is_check(v: &Value) -> bool {
    v.get("residual").is_some() && v.get("bound").is_some() && v.get("pass").is_some()
}

fn complex(v: &Value) -> String {
    match v.as_array().map(|a| (a[0].as_f64(), a[1].as_f64())) {
        Some((Some(re), Some(0.0))) => format!("{re:.6}"),
        Some((Some(re), Some(im))) => format!("{re:.6}{im:+.6}i"),
        _ => v.to_string(),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.3e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) if items.iter().all(|x| x.as_array().is_some_and(|p| p.len() == 2)) && !items.is_empty() => {
            let cells: Vec<String> = items.iter().map(complex).collect();
            format!("[{}]", cells.join(", "))
        }
        Value::String(s) => s.clone(),
        _ => v.to_string(),
    }
}
