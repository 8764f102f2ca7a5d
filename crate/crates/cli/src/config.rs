use std::ffi::OsString;
use std::path::Path;

use crate::error::CliError;

fn flag_value(args: &[OsString], name: &str) -> Option<String> {
    let long = format!("--{name}");
    let prefix = format!("--{name}=");
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == long {
            return it.next().map(|v| v.to_string_lossy().into_owned());
        }
        if let Some(v) = a.strip_prefix(&prefix) {
            return Some(v.to_string());
        }
    }
    None
}

fn has_flag(args: &[OsString], name: &str) -> bool {
    let long = format!("--{name}");
    let prefix = format!("--{name}=");
    args.iter().skip(1).any(|a| {
        let a = a.to_string_lossy();
        a == long || a.starts_with(&prefix)
    })
}

/// First positional argument, skipping values of the global flags.
fn subcommand(args: &[OsString]) -> Option<String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--threads" || a == "--config" {
            it.next();
        } else if !a.starts_with('-') {
            return Some(a.into_owned());
        }
    }
    None
}

fn render(key: &str, value: &toml::Value) -> Result<Option<String>, CliError> {
    Ok(match value {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(_) => None,
        toml::Value::Array(items) => Some(
            items
                .iter()
                .map(|v| render(key, v)?.ok_or_else(|| CliError::Config(format!("`{key}`: arrays of booleans are not flags"))))
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
        ),
        other => return Err(CliError::Config(format!("`{key}`: unsupported value {other}"))),
    })
}

/// Appends `--key value` for every config entry whose flag is absent from
/// `args`. Top-level keys apply to any subcommand; a table named after the
/// subcommand overrides them. Explicit flags always win.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = flag_value(&args, "config") else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(Path::new(&path), e))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(format!("{path}: {e}")))?;
    let sub = subcommand(&args);
    let mut entries: Vec<(String, toml::Value)> = Vec::new();
    for (k, v) in &table {
        if !v.is_table() {
            entries.push((k.replace('_', "-"), v.clone()));
        }
    }
    if let Some(toml::Value::Table(section)) = sub.as_deref().and_then(|s| table.get(s)) {
        for (k, v) in section {
            let key = k.replace('_', "-");
            entries.retain(|(e, _)| *e != key);
            entries.push((key, v.clone()));
        }
    }
    let mut out = args.clone();
    for (key, value) in entries {
        if has_flag(&args, &key) {
            continue;
        }
        match (&value, render(&key, &value)?) {
            (toml::Value::Boolean(true), _) => out.push(format!("--{key}").into()),
            (toml::Value::Boolean(false), _) => {}
            (_, Some(v)) => {
                out.push(format!("--{key}").into());
                out.push(v.into());
            }
            (_, None) => {}
        }
    }
    Ok(out)
}
