use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const TOOL: &str = "gapclique";

/// Wrapper stamped onto every JSON artifact.
#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub tool: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: Value,
    pub payload: T,
}

/// Rejects names that could escape the output directory.
pub fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name == "." || name == ".." || name.contains(['/', '\\']) || name.contains('\0') {
        return Err(CliError::Config(format!(
            "output name {name:?} must be a plain file name without path separators"
        )));
    }
    Ok(())
}

pub struct Writer<'a> {
    cfg: &'a RunConfig,
    command: &'static str,
}

impl<'a> Writer<'a> {
    pub fn new(cfg: &'a RunConfig, command: &'static str) -> Self {
        Self { cfg, command }
    }

    pub fn path(&self, name: &str) -> Result<PathBuf> {
        check_name(name)?;
        std::fs::create_dir_all(&self.cfg.out_dir).map_err(|e| CliError::io(&self.cfg.out_dir, e))?;
        Ok(self.cfg.out_dir.join(name))
    }

    pub fn envelope<T: Serialize>(&self, payload: T) -> Envelope<T> {
        Envelope {
            tool: TOOL.into(),
            command: self.command.into(),
            seed: self.cfg.seed,
            config_hash: self.cfg.hash(),
            config: serde_json::to_value(self.cfg).expect("config serializes"),
            payload,
        }
    }

    pub fn json<T: Serialize>(&self, name: &str, payload: &T) -> Result<PathBuf> {
        let path = self.path(name)?;
        let mut text = serde_json::to_string_pretty(&self.envelope(payload)).map_err(|e| CliError::json(&path, e))?;
        text.push('\n');
        self.text(&path, &text)?;
        Ok(path)
    }

    /// JSON lines: a header line with the stamp, then one line per row.
    pub fn json_lines<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let path = self.path(name)?;
        let mut header = serde_json::to_value(self.envelope(Value::Null)).map_err(|e| CliError::json(&path, e))?;
        if let Value::Object(map) = &mut header {
            map.remove("payload");
            map.insert("kind".into(), "header".into());
        }
        let mut text = header.to_string();
        text.push('\n');
        for row in rows {
            text.push_str(&serde_json::to_string(row).map_err(|e| CliError::json(&path, e))?);
            text.push('\n');
        }
        self.text(&path, &text)?;
        Ok(path)
    }

    pub fn text(&self, path: &Path, text: &str) -> Result<()> {
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
}

/// The payload of an enveloped artifact, or the whole document when it is bare.
pub fn read_payload(path: &Path) -> Result<Value> {
    let mut doc = read_json(path)?;
    let enveloped = doc.get("tool").and_then(Value::as_str) == Some(TOOL) && doc.get("payload").is_some();
    Ok(if enveloped { doc["payload"].take() } else { doc })
}

pub fn read_typed<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_value(read_payload(path)?).map_err(|e| CliError::json(path, e))
}
