//! `--config` manifests: a JSON object naming the subcommand and its flags,
//! expanded back into an argument list and parsed like the command line.
//!
//! ```json
//! {"command": "burg fit", "args": {"alphas": [1, 0.5]}, "seed": 7}
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

pub fn expand(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    to_argv(&v)
}

pub fn to_argv(v: &Value) -> Result<Vec<String>> {
    let Some(obj) = v.as_object() else { bail!("config must be a JSON object") };
    for key in obj.keys() {
        if !matches!(key.as_str(), "command" | "args" | "seed" | "output" | "format") {
            bail!("unknown config key {key:?}");
        }
    }
    let mut argv = vec!["renyi-lab".to_string()];
    match obj.get("command") {
        Some(Value::String(s)) => argv.extend(s.split_whitespace().map(str::to_string)),
        Some(Value::Array(words)) => {
            for w in words {
                argv.push(w.as_str().context("command words must be strings")?.to_string());
            }
        }
        _ => bail!("config needs a \"command\" string"),
    }
    if let Some(args) = obj.get("args") {
        let args = args.as_object().context("\"args\" must be an object")?;
        for (k, val) in args {
            push_flag(&mut argv, k, val)?;
        }
    }
    for k in ["seed", "output", "format"] {
        if let Some(val) = obj.get(k) {
            push_flag(&mut argv, k, val)?;
        }
    }
    Ok(argv)
}

fn push_flag(argv: &mut Vec<String>, key: &str, val: &Value) -> Result<()> {
    if key == "config" {
        bail!("configs cannot nest");
    }
    let flag = format!("--{}", key.replace('_', "-"));
    match val {
        Value::Null | Value::Bool(false) => {}
        Value::Bool(true) => argv.push(flag),
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
            argv.push(flag);
            argv.push(parts.join(","));
        }
        other => {
            argv.push(flag);
            argv.push(scalar(other)?);
        }
    }
    Ok(())
}

fn scalar(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Object(_) => Ok(v.to_string()),
        _ => bail!("unsupported config value {v}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn expands_lists_flags_and_globals() {
        let v = json!({"command": "stationarize", "args": {"m": "7..9", "exact": true, "alpha": 2}, "seed": 3});
        assert_eq!(to_argv(&v).unwrap(), ["renyi-lab", "stationarize", "--alpha", "2", "--exact", "--m", "7..9", "--seed", "3"]);
        let v = json!({"command": ["burg", "fit"], "args": {"alphas": [1, 0.5], "skip": false}});
        assert_eq!(to_argv(&v).unwrap(), ["renyi-lab", "burg", "fit", "--alphas", "1,0.5"]);
    }

    #[test]
    fn rejects_bad_manifests() {
        assert!(to_argv(&json!([1])).is_err());
        assert!(to_argv(&json!({"args": {}})).is_err());
        assert!(to_argv(&json!({"command": "entropy", "colour": 1})).is_err());
        assert!(to_argv(&json!({"command": "entropy", "args": {"config": "x"}})).is_err());
    }
}
