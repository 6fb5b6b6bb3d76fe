use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// What one invocation read and produced. Plain output prints each result's
/// text on stdout and the provenance lines on stderr; `--json` prints
/// everything as one object on stdout.
pub struct Report {
    command: String,
    seed: u64,
    inputs: Vec<(String, String)>,
    results: Vec<(String, Value, String)>,
    started: Instant,
}

impl Report {
    pub fn new(command: String, seed: u64) -> Self {
        Report {
            command,
            seed,
            inputs: Vec::new(),
            results: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push((path.display().to_string(), sha256_hex(&bytes)));
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    /// A result printed as `key=value`.
    pub fn put(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        let key = key.into();
        let value = value.into();
        let text = match &value {
            Value::String(s) => format!("{key}={s}"),
            v => format!("{key}={v}"),
        };
        self.results.push((key, value, text));
    }

    /// A result with its own plain-text rendering.
    pub fn put_line(&mut self, key: impl Into<String>, value: impl Into<Value>, text: impl Into<String>) {
        self.results.push((key.into(), value.into(), text.into()));
    }

    pub fn emit(&self, as_json: bool) {
        let elapsed = self.started.elapsed().as_secs_f64();
        if as_json {
            let mut results = Map::new();
            for (k, v, _) in &self.results {
                results.insert(k.clone(), v.clone());
            }
            let inputs: Vec<Value> = self
                .inputs
                .iter()
                .map(|(p, h)| json!({ "path": p, "sha256": h }))
                .collect();
            let obj = json!({
                "command": self.command,
                "seed": self.seed,
                "inputs": inputs,
                "results": results,
                "elapsed_s": elapsed,
            });
            println!("{obj}");
        } else {
            for (_, _, text) in &self.results {
                println!("{text}");
            }
            for (p, h) in &self.inputs {
                eprintln!("# input {p} sha256={h}");
            }
            eprintln!("# seed={} elapsed={elapsed:.3}s", self.seed);
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
