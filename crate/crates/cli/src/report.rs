//! Run reports and their JSON / CSV renderings.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Git-style object id: SHA-256 over `"blob <len>\0"` followed by the bytes.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub inputs: Vec<FileRef>,
    pub artifacts: Vec<FileRef>,
    /// `None` for verbs that check nothing.
    pub passed: Option<bool>,
    pub result: Value,
    /// Hash of `result` as serialized above.
    pub result_sha256: String,
}

/// Collects inputs read and artifacts written during one run.
#[derive(Debug, Default)]
pub struct Io {
    pub inputs: Vec<FileRef>,
    pub artifacts: Vec<FileRef>,
}

impl Io {
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.inputs.push(FileRef { path: path.display().to_string(), sha256: blob_hash(text.as_bytes()) });
        Ok(text)
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T> {
        let text = self.read(path)?;
        serde_json::from_str(&text).with_context(|| format!("{}: schema violation", path.display()))
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
        self.artifacts.push(FileRef { path: path.display().to_string(), sha256: blob_hash(text.as_bytes()) });
        Ok(())
    }
}

impl Report {
    pub fn new(command: &str, config: Value, seed: u64, io: Io, passed: Option<bool>, result: Value) -> Self {
        let result_sha256 = blob_hash(result.to_string().as_bytes());
        Self { command: command.into(), config, seed, inputs: io.inputs, artifacts: io.artifacts, passed, result, result_sha256 }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per top-level result field: name, exact text, float value.
    /// Nested values are written as compact JSON with an empty float column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["field", "exact", "float"])?;
        w.write_record(["command", self.command.as_str(), ""])?;
        if let Some(p) = self.passed {
            w.write_record(["passed", if p { "true" } else { "false" }, ""])?;
        }
        let empty = Map::new();
        for (k, v) in self.result.as_object().unwrap_or(&empty) {
            let (exact, float) = csv_cells(v);
            w.write_record([k.as_str(), exact.as_str(), float.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_cells(v: &Value) -> (String, String) {
    match v {
        Value::String(s) => {
            let float = ocsp_core::rational::parse(s).map(|r| ocsp_core::rational::to_f64(&r).to_string()).unwrap_or_default();
            (s.clone(), float)
        }
        Value::Number(n) => (n.to_string(), n.as_f64().map(|x| x.to_string()).unwrap_or_default()),
        Value::Bool(b) => (b.to_string(), String::new()),
        Value::Null => (String::new(), String::new()),
        other => (other.to_string(), String::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_git_blob_construction() {
        // sha256 of "blob 0\0".
        assert_eq!(blob_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
    }

    #[test]
    fn csv_has_fraction_and_float_columns() {
        let result = serde_json::json!({"value": "5/6", "holds": true, "n": 3});
        let r = Report::new("x", Value::Null, 1, Io::default(), Some(true), result);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("value,5/6,0.8333333333333334"));
        assert!(text.contains("passed,true,"));
    }
}
