//! Artifact writers: headered CSV for traces and tables, JSON for summaries,
//! plus a manifest covering every emitted file. Numbers are written with
//! Rust's shortest round-trip formatting, so re-running the same spec
//! reproduces the bytes exactly.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub description: String,
}

/// Collects files under one output directory and records them for the
/// manifest written by [`OutputWriter::finish`].
pub struct OutputWriter {
    dir: PathBuf,
    quiet: bool,
    files: Vec<ManifestEntry>,
}

impl OutputWriter {
    pub fn new(dir: &Path, quiet: bool) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            quiet,
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn record(&mut self, name: &str, description: &str) {
        if !self.quiet {
            println!("wrote {}", self.dir.join(name).display());
        }
        self.files.push(ManifestEntry {
            name: name.to_string(),
            description: description.to_string(),
        });
    }

    /// Complex traces over time: columns `t, <name>_re, <name>_im, ...`.
    pub fn trace_csv(
        &mut self,
        name: &str,
        description: &str,
        times: &[f64],
        columns: &[(&str, &[C64])],
    ) -> Result<()> {
        for (label, col) in columns {
            if col.len() != times.len() {
                return Err(Error::GridMismatch(format!(
                    "column `{label}` has {} samples for {} times",
                    col.len(),
                    times.len()
                )));
            }
        }
        let mut out = String::from("t");
        for (label, _) in columns {
            out.push_str(&format!(",{label}_re,{label}_im"));
        }
        out.push('\n');
        for (k, &t) in times.iter().enumerate() {
            out.push_str(&format!("{t}"));
            for (_, col) in columns {
                out.push_str(&format!(",{},{}", col[k].re, col[k].im));
            }
            out.push('\n');
        }
        self.write_bytes(name, out.as_bytes())?;
        self.record(name, description);
        Ok(())
    }

    /// Real-valued table with one header per column.
    pub fn table_csv(
        &mut self,
        name: &str,
        description: &str,
        headers: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<()> {
        let mut out = headers.join(",");
        out.push('\n');
        for row in rows {
            if row.len() != headers.len() {
                return Err(Error::GridMismatch(format!(
                    "row width {} does not match {} headers",
                    row.len(),
                    headers.len()
                )));
            }
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        self.write_bytes(name, out.as_bytes())?;
        self.record(name, description);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, description: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Validation(format!("serialization failed: {e}")))?;
        self.write_bytes(name, text.as_bytes())?;
        self.record(name, description);
        Ok(())
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let mut f = fs::File::create(self.dir.join(name))?;
        f.write_all(bytes)?;
        if !bytes.ends_with(b"\n") {
            f.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Write `manifest.json` (spec echo plus every emitted file) and return
    /// the output directory.
    pub fn finish(mut self, spec_echo: serde_json::Value) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            spec: &'a serde_json::Value,
            files: &'a [ManifestEntry],
        }
        self.record("manifest.json", "list of every emitted file");
        let text = serde_json::to_string_pretty(&Manifest {
            spec: &spec_echo,
            files: &self.files,
        })
        .map_err(|e| Error::Validation(format!("serialization failed: {e}")))?;
        self.write_bytes("manifest.json", text.as_bytes())?;
        Ok(self.dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn csv_layout_and_manifest_coverage() {
        let dir = tempdir().unwrap();
        let mut w = OutputWriter::new(dir.path(), true).unwrap();
        let times = [0.0, 0.5];
        let col = [C64::new(1.0, -2.0), C64::new(0.25, 0.0)];
        w.trace_csv("a.csv", "demo trace", &times, &[("sig", &col)])
            .unwrap();
        w.table_csv("b.csv", "demo table", &["x", "y"], &[vec![1.0, 2.0]])
            .unwrap();
        let out = w.finish(serde_json::json!({"k": 1})).unwrap();

        let a = fs::read_to_string(out.join("a.csv")).unwrap();
        assert_eq!(a, "t,sig_re,sig_im\n0,1,-2\n0.5,0.25,0\n");
        let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
        let names: Vec<&str> = v["files"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["name"].as_str().unwrap())
            .collect();
        // every emitted file, including the listing itself
        for f in ["a.csv", "b.csv", "manifest.json"] {
            assert!(names.contains(&f), "{names:?}");
        }
    }

    #[test]
    fn rewriting_is_bit_identical() {
        let dir = tempdir().unwrap();
        let times = [0.0, 1.0, 2.0];
        let col = [
            C64::new(0.1, 0.2),
            C64::new(1.0 / 3.0, -7.5e-11),
            C64::new(0.0, 0.0),
        ];
        let emit = || {
            let mut w = OutputWriter::new(dir.path(), true).unwrap();
            w.trace_csv("t.csv", "trace", &times, &[("s", &col)]).unwrap();
            w.finish(serde_json::json!({})).unwrap();
            fs::read(dir.path().join("t.csv")).unwrap()
        };
        assert_eq!(emit(), emit());
    }

    #[test]
    fn mismatched_column_is_rejected() {
        let dir = tempdir().unwrap();
        let mut w = OutputWriter::new(dir.path(), true).unwrap();
        let err = w
            .trace_csv("x.csv", "bad", &[0.0, 1.0], &[("s", &[C64::new(1.0, 0.0)])])
            .unwrap_err();
        assert!(matches!(err, Error::GridMismatch(_)));
    }
}
