//! Artifact directory with a reproducibility manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Rows of strings under a header; every numeric column names its unit.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(vec![]);
        let fail = |e: csv::Error| CliError::Numerical(format!("csv encoding: {e}"));
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        w.into_inner().map_err(|e| CliError::Numerical(format!("csv encoding: {e}")))
    }
}

/// Shortest round-trip decimal form; negative zero prints as `0`.
pub fn num(x: f64) -> String {
    format!("{}", x + 0.0)
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: Option<u64>,
    n_paths: Option<u64>,
    /// SHA-256 over the command, the effective config and every input file.
    input_digest: String,
    config: &'a BTreeMap<String, toml::Value>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

/// Collects the files of one subcommand run and writes them with a manifest.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    command: String,
    files: BTreeMap<String, Vec<u8>>,
    inputs: Vec<(String, Vec<u8>)>,
}

pub const MANIFEST: &str = "manifest.json";

impl Artifacts {
    pub fn new(out_dir: &Path, command: &str) -> Self {
        Self { dir: out_dir.join(command), command: command.to_string(), files: BTreeMap::new(), inputs: vec![] }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Registers an input file; its bytes enter the digest.
    pub fn input(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        if !self.inputs.iter().any(|(n, b)| *n == name && *b == bytes) {
            self.inputs.push((name, bytes.clone()));
        }
        Ok(bytes)
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> CliResult<()> {
        let bytes = table.to_csv()?;
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| CliError::Numerical(format!("json encoding of {name}: {e}")))?;
        bytes.push(b'\n');
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn input_digest(&self, config: &BTreeMap<String, toml::Value>) -> CliResult<String> {
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        h.update([0]);
        let cfg = serde_json::to_vec(config).map_err(|e| CliError::Numerical(e.to_string()))?;
        h.update(&cfg);
        let mut inputs: Vec<_> = self.inputs.iter().collect();
        inputs.sort();
        for (name, bytes) in inputs {
            h.update([0]);
            h.update(name.as_bytes());
            h.update([0]);
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        Ok(hex::encode(h.finalize()))
    }

    /// Writes every file plus `manifest.json` and returns the directory.
    pub fn finish(
        self,
        config: &BTreeMap<String, toml::Value>,
        seed: Option<u64>,
        n_paths: Option<u64>,
    ) -> CliResult<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let input_digest = self.input_digest(config)?;
        let mut outputs = BTreeMap::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            outputs.insert(name.clone(), sha256_hex(bytes));
        }
        let manifest = Manifest {
            tool: "prepay",
            version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            seed,
            n_paths,
            input_digest,
            config,
            inputs: self.inputs.iter().map(|(n, b)| (n.clone(), sha256_hex(b))).collect(),
            outputs,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Numerical(e.to_string()))?;
        bytes.push(b'\n');
        let path = self.dir.join(MANIFEST);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(self.dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_numbers() {
        let mut t = Table::new(["a", "b_bps"]);
        t.push(vec!["x,y".into(), num(0.1 + 0.2)]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "a,b_bps\n\"x,y\",0.30000000000000004\n");
    }

    #[test]
    fn digest_depends_on_config_and_inputs() {
        let mut cfg = BTreeMap::new();
        cfg.insert("seed".to_string(), toml::Value::Integer(1));
        let a = Artifacts::new(Path::new("out"), "price");
        let d1 = a.input_digest(&cfg).unwrap();
        cfg.insert("seed".to_string(), toml::Value::Integer(2));
        assert_ne!(d1, a.input_digest(&cfg).unwrap());
        let mut b = Artifacts::new(Path::new("elsewhere"), "price");
        b.inputs.push(("c.csv".into(), b"1".to_vec()));
        assert_ne!(b.input_digest(&cfg).unwrap(), a.input_digest(&cfg).unwrap());
    }
}
