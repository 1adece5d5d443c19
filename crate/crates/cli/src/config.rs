//! Flat `key=value` config files.
//!
//! `command=NAME` selects the subcommand; every other key becomes
//! `--key=value`. Arguments given on the command line after the config file
//! override it.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

use crate::args::Command;
use crate::Error;

/// Expands `arcflow --config FILE [ARGS...]` into an ordinary argument list.
/// Anything else is returned unchanged.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, Error> {
    let path = match args.get(1).and_then(|a| a.to_str()) {
        Some("--config") => match args.get(2) {
            Some(p) => (p.clone(), 3),
            None => return Err(Error::usage("--config needs a file".into())),
        },
        Some(a) if a.starts_with("--config=") => (OsString::from(&a["--config=".len()..]), 2),
        _ => return Ok(args),
    };
    let (file, rest) = path;
    let text = fs::read_to_string(&file)
        .map_err(|e| Error::usage(format!("{}: {e}", file.to_string_lossy())))?;
    let mut command = None;
    let mut flags = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::usage(format!("config line {}: expected key=value, got `{line}`", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key == "command" {
            command = Some(value.to_string());
        } else {
            flags.push(OsString::from(format!("--{key}={value}")));
        }
    }
    let command = command.ok_or_else(|| Error::usage("config file has no `command` key".into()))?;
    let mut out = vec![args[0].clone(), OsString::from(command)];
    out.extend(flags);
    out.extend(args[rest..].iter().cloned());
    Ok(out)
}

/// The resolved arguments of `command` in the format [`expand`] reads.
pub fn dump(command: &Command) -> Result<String, Error> {
    let Value::Object(map) = serde_json::to_value(command).map_err(|e| Error::usage(e.to_string()))? else {
        unreachable!("commands serialize to maps")
    };
    let mut out = String::new();
    if let Some(Value::String(name)) = map.get("command") {
        out.push_str(&format!("command={name}\n"));
    }
    for (key, value) in &map {
        let text = match value {
            Value::Null => continue,
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        if key != "command" {
            out.push_str(&format!("{}={text}\n", key.replace('_', "-")));
        }
    }
    Ok(out)
}
