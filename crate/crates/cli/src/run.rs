//! Run directories: `config.json`, `data.csv`, `summary.json` and a manifest
//! of input and output hashes. Nothing time- or host-dependent is written, so
//! a rerun with the same command, seed and inputs is byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

/// A statistical claim checked by a run.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Rows of one versioned CSV schema.
pub struct Table {
    pub schema: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &'static str, header: &[&str]) -> Self {
        Self {
            schema,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// `# schema=<id>/v1 config=<json>`, then the header row and the data.
    pub fn to_bytes(&self, config: &impl Serialize) -> anyhow::Result<Vec<u8>> {
        let mut buf = format!(
            "# schema={}/v1 config={}\n",
            self.schema,
            serde_json::to_string(config)?
        )
        .into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for row in &self.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        Ok(buf)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct RunOutput<'a, C: Serialize> {
    pub command: &'a str,
    pub config: &'a C,
    pub table: &'a Table,
    pub summary: serde_json::Value,
    pub verdicts: &'a [Verdict],
    pub inputs: Vec<PathBuf>,
}

impl<C: Serialize> RunOutput<'_, C> {
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let config = serde_json::to_vec_pretty(&json!({
            "command": self.command,
            "config": self.config,
        }))?;
        let data = self.table.to_bytes(self.config)?;
        let summary = serde_json::to_vec_pretty(&json!({
            "summary": self.summary,
            "verdicts": self.verdicts,
            "passed": self.verdicts.iter().all(|v| v.passed),
        }))?;
        let inputs = self
            .inputs
            .iter()
            .map(|p| {
                let bytes = fs::read(p).with_context(|| format!("hashing {}", p.display()))?;
                Ok(json!({"path": p.display().to_string(), "sha256": sha256_hex(&bytes)}))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let manifest = serde_json::to_vec_pretty(&json!({
            "tool": "rqmc",
            "version": env!("CARGO_PKG_VERSION"),
            "schema": format!("{}/v1", self.table.schema),
            "inputs": inputs,
            "outputs": {
                "config.json": sha256_hex(&config),
                "data.csv": sha256_hex(&data),
                "summary.json": sha256_hex(&summary),
            },
        }))?;
        for (name, bytes) in [
            ("config.json", config),
            ("data.csv", data),
            ("summary.json", summary),
            ("manifest.json", manifest),
        ] {
            fs::write(dir.join(name), bytes).with_context(|| format!("writing {name}"))?;
        }
        Ok(())
    }
}

/// Prints verdicts and returns whether all passed.
pub fn report(verdicts: &[Verdict]) -> bool {
    for v in verdicts {
        println!(
            "{} {}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
    }
    verdicts.iter().all(|v| v.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        let text = String::from_utf8(t.to_bytes(&json!({"k": 1})).unwrap()).unwrap();
        assert_eq!(text, "# schema=demo/v1 config={\"k\":1}\na,b\n1,x\n");
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
