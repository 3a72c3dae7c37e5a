//! Layered configuration: built-in defaults, then a JSON file, then flags.
//!
//! A config file is a flat JSON object whose keys mirror the flag names
//! (`pool_size` for `--pool-size`, lists as arrays). The manifest of an
//! earlier report is accepted too, either as the report itself (CSV or JSON)
//! or as a bare manifest object; its resolved `config` is replayed.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::ConfigError;

/// Loads the config object stored at `path` for `command`.
pub fn load(path: &Path, command: &str) -> Result<Map<String, Value>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = match text.strip_prefix("# manifest: ") {
        Some(rest) => serde_json::from_str(rest.lines().next().unwrap_or_default()),
        None => serde_json::from_str(&text),
    }
    .map_err(|e| ConfigError(format!("{} is not a JSON config: {e}", path.display())))?;
    let value = match value {
        Value::Object(mut obj) if obj.contains_key("manifest") => obj.remove("manifest").unwrap(),
        other => other,
    };
    match value {
        Value::Object(mut obj) if obj.contains_key("command") && obj.contains_key("config") => {
            let recorded = obj.get("command").and_then(Value::as_str).unwrap_or_default();
            if recorded != command {
                return Err(ConfigError(format!(
                    "manifest was recorded by `{recorded}`, not `{command}`"
                )));
            }
            match obj.remove("config") {
                Some(Value::Object(config)) => Ok(config),
                _ => Err(ConfigError("manifest config is not an object".into())),
            }
        }
        Value::Object(obj) => Ok(obj),
        _ => Err(ConfigError(format!("{} must hold a JSON object", path.display()))),
    }
}

/// Overlays the flags given on the command line onto the file layer.
///
/// `T` has only optional fields and skips `None` when serialized, so unset
/// flags leave file values in place.
pub fn merge<T>(file: Option<Map<String, Value>>, flags: &T) -> Result<T, ConfigError>
where
    T: Serialize + DeserializeOwned,
{
    let mut merged = file.unwrap_or_default();
    match serde_json::to_value(flags).expect("flags serialize") {
        Value::Object(set) => merged.extend(set),
        _ => unreachable!("flag structs serialize to objects"),
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| ConfigError(format!("bad config: {e}")))
}
