//! `--config` merging, resolved-config echo and thread setup.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub const THREADS_ENV: &str = "US_DEGRADE_THREADS";

/// Keys that belong to the run rather than to the subcommand arguments.
const RUN_KEYS: [&str; 2] = ["command", "threads"];

/// Loaded `--config` document, split into run-level keys and argument
/// overrides.
#[derive(Debug, Default)]
pub struct ConfigFile {
    pub threads: Option<String>,
    overrides: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path, command: &str) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let Value::Object(mut map) = value else {
            return Err(CliError::Usage(format!("{}: expected a JSON object", path.display())));
        };
        if let Some(cmd) = map.get("command") {
            if cmd.as_str() != Some(command) {
                return Err(CliError::Usage(format!(
                    "{}: config is for command {cmd}, not {command:?}",
                    path.display()
                )));
            }
        }
        let threads = match map.get("threads") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(Value::Number(n)) => Some(n.to_string()),
            Some(other) => return Err(CliError::Usage(format!("threads: unexpected value {other}"))),
        };
        RUN_KEYS.iter().for_each(|k| {
            map.remove(*k);
        });
        Ok(Self {
            threads,
            overrides: map,
        })
    }

    /// Flags first, then every key of the config document on top.
    pub fn apply<A: Serialize + DeserializeOwned>(&self, args: &A) -> Result<A, CliError> {
        let Value::Object(mut base) = serde_json::to_value(args).expect("arguments serialize") else {
            unreachable!("argument structs serialize to objects");
        };
        for (k, v) in &self.overrides {
            base.insert(k.clone(), v.clone());
        }
        serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("config: {e}")))
    }
}

/// Thread count: the environment variable wins over the flag/config value.
/// `auto` (or 0) leaves the choice to the pool.
pub fn resolve_threads(flag: Option<&str>) -> Result<String, CliError> {
    let raw = std::env::var(THREADS_ENV).ok().or(flag.map(str::to_string)).unwrap_or_else(|| "auto".into());
    let raw = raw.trim().to_ascii_lowercase();
    if raw == "auto" || raw == "0" {
        return Ok("auto".into());
    }
    match raw.parse::<usize>() {
        Ok(n) => Ok(n.to_string()),
        Err(_) => Err(CliError::Usage(format!("threads must be a positive integer or \"auto\", got {raw:?}"))),
    }
}

pub fn init_threads(threads: &str) -> Result<(), CliError> {
    let n = if threads == "auto" { 0 } else { threads.parse().expect("validated") };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

/// The fully resolved configuration of one run. Feeding it back through
/// `--config` repeats the run.
pub fn echo<A: Serialize>(command: &str, threads: &str, args: &A, path: &Path) -> Result<(), CliError> {
    let Value::Object(fields) = serde_json::to_value(args).expect("arguments serialize") else {
        unreachable!("argument structs serialize to objects");
    };
    let mut doc = Map::new();
    doc.insert("command".into(), command.into());
    doc.insert("threads".into(), threads.into());
    doc.extend(fields);
    write_json(path, &Value::Object(doc))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// `dir/name.png` -> `dir/name.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}"))
}
