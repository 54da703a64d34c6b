//! `--config` support: a JSON object whose keys are flag names. Entries are
//! spliced into the argument list before parsing unless the flag is already
//! present, so command-line flags win.

use std::ffi::OsString;
use std::path::Path;

use serde_json::{Map, Value};

const COMMANDS: [&str; 5] = ["norm", "moments", "inequality", "simulate", "compare"];

/// Path given to `--config`, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--" {
            return None;
        }
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(path) = s.strip_prefix("--config=") {
            return Some(path.into());
        }
    }
    None
}

pub fn load(path: &Path) -> Result<Map<String, Value>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(format!("config {} must be a JSON object", path.display())),
        Err(e) => Err(format!("config {} is not valid JSON: {e}", path.display())),
    }
}

fn render(key: &str, value: &Value) -> Result<Option<String>, String> {
    let scalar = |v: &Value| match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(format!("config key `{key}`: unsupported value {other}")),
    };
    match value {
        Value::Null | Value::Bool(false) => Ok(None),
        Value::Bool(true) => Ok(Some(String::new())),
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
            Ok(Some(parts.join(",")))
        }
        other => scalar(other).map(Some),
    }
}

fn has_flag(args: &[OsString], flag: &str) -> bool {
    let eq = format!("{flag}=");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&eq)
    })
}

/// Merges `config` into `args` (which includes the program name).
///
/// A `command` key (e.g. `"inequality search"`) supplies the subcommand when
/// none is given on the command line.
pub fn merge(mut args: Vec<OsString>, config: &Map<String, Value>) -> Result<Vec<OsString>, String> {
    let has_command = args.iter().skip(1).any(|a| COMMANDS.contains(&a.to_string_lossy().as_ref()));
    if !has_command {
        if let Some(command) = config.get("command") {
            let words = command
                .as_str()
                .ok_or("config key `command` must be a string")?
                .split_whitespace()
                .map(OsString::from);
            let tail = args.split_off(1.min(args.len()));
            args.extend(words);
            args.extend(tail);
        }
    }
    let mut extra = Vec::new();
    for (key, value) in config {
        if key == "command" || key == "config" {
            continue;
        }
        let flag = if key == "T" { "--T".to_string() } else { format!("--{}", key.replace('_', "-")) };
        if has_flag(&args, &flag) {
            continue;
        }
        match render(key, value)? {
            None => {}
            Some(v) if v.is_empty() && value.is_boolean() => extra.push(OsString::from(&flag)),
            Some(v) => {
                extra.push(OsString::from(&flag));
                extra.push(OsString::from(v));
            }
        }
    }
    match args.iter().position(|a| a == "--") {
        Some(i) => {
            let tail = args.split_off(i);
            args.extend(extra);
            args.extend(tail);
        }
        None => args.extend(extra),
    }
    Ok(args)
}
