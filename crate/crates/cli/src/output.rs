//! Report rendering. The JSON body holds only the command, the echoed
//! configuration and the result, so equal inputs give equal bytes.

use std::io::Write;

use serde_json::{json, Value};

use ideallab::config::{Format, RunConfig};

use crate::input::CliError;

pub fn report(cfg: &RunConfig, command: &str, result: &Value) {
    match cfg.format {
        Format::Json => {
            let body = json!({ "command": command, "config": cfg, "result": result });
            emit(&serde_json::to_string_pretty(&body).expect("reports serialize"));
        }
        Format::Text => emit(text(cfg, command, result).trim_end()),
    }
}

fn text(cfg: &RunConfig, command: &str, result: &Value) -> String {
    let mut out = format!(
        "command: {command}\nconfig: {}\n",
        serde_json::to_string(cfg).expect("config serializes")
    );
    match result {
        Value::Object(map) if command == "selftest" => {
            for c in map
                .get("criteria")
                .and_then(Value::as_array)
                .into_iter()
                .flatten()
            {
                let pass = c["pass"].as_bool().unwrap_or(false);
                out.push_str(&format!(
                    "criterion {:>2} {} {}: {}\n",
                    c["id"],
                    if pass { "PASS" } else { "FAIL" },
                    c["name"].as_str().unwrap_or(""),
                    c["detail"].as_str().unwrap_or("")
                ));
            }
            out.push_str(&format!("pass: {}\n", map["pass"]));
        }
        Value::Object(map) => {
            for (k, v) in map {
                out.push_str(&format!("{k}: {v}\n"));
            }
        }
        other => out.push_str(&format!("{other}\n")),
    }
    out
}

pub fn error(e: &CliError) {
    let body = json!({ "error": { "code": e.code, "message": e.message } });
    emit(&serde_json::to_string_pretty(&body).expect("errors serialize"));
}

/// Writes one document; a closed pipe is not an error worth reporting.
fn emit(doc: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{doc}").and_then(|_| out.flush());
}
