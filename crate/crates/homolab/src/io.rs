//! Canonical file formats and run manifests.
//!
//! Graphs and reports travel as JSON, tabular results as RFC-4180-style CSV
//! with a dot decimal separator and 12 significant digits. Every value is
//! finite; rows whose value is undefined carry an explicit flag instead of a
//! NaN. Writes go through a temp file and rename, and every output can be
//! accompanied by a manifest recording the resolved config, seeds, library
//! version and content digests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::SweepRow;
use crate::graph::Graph;
use crate::theory::GridRow;

/// Format with 12 significant digits, plain decimal notation.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    debug_assert!(x.is_finite(), "non-finite values must be flagged, not printed");
    let exponent = x.abs().log10().floor() as i32;
    if !(-250..=250).contains(&exponent) {
        return format!("{x:e}");
    }
    let scale = 10f64.powi(11 - exponent);
    let rounded = (x * scale).round() / scale;
    format!("{rounded}")
}

/// Read and validate a canonical graph document.
pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let text = fs::read_to_string(path)?;
    Graph::from_json(&text)
}

/// Write the canonical graph document atomically.
pub fn write_graph(path: impl AsRef<Path>, graph: &Graph) -> Result<()> {
    write_atomic(path, graph.to_canonical_json().as_bytes())
}

/// Write through a sibling temp file and rename, so readers never observe a
/// partial document.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Coefficient grid as CSV: `d,h,b1,bprime1,diff,flag`. Degenerate rows
/// leave `b1` and `diff` empty and set the flag.
pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut out = String::from("d,h,b1,bprime1,diff,flag\n");
    for row in rows {
        let b1 = row.b1.map(format_sig).unwrap_or_default();
        let diff = row.diff.map(format_sig).unwrap_or_default();
        let flag = if row.degenerate { "degenerate_b1" } else { "ok" };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_sig(row.d),
            format_sig(row.h),
            b1,
            format_sig(row.bprime1),
            diff,
            flag
        ));
    }
    out
}

/// Sweep results as CSV: `h,rho,kind,bin_lo,bin_hi,f1_mean,f1_std,n_nodes,flag`.
/// Rows are emitted in sorted key order.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.h, a.rho, a.kind.tag(), a.bin_lo)
            .partial_cmp(&(b.h, b.rho, b.kind.tag(), b.bin_lo))
            .expect("sweep keys are finite")
    });
    let mut out = String::from("h,rho,kind,bin_lo,bin_hi,f1_mean,f1_std,n_nodes,flag\n");
    for row in sorted {
        let mean = row.f1_mean.map(format_sig).unwrap_or_default();
        let std = row.f1_std.map(format_sig).unwrap_or_default();
        let flag = if row.usable_seeds == 0 {
            "under_occupied"
        } else if row.usable_seeds < row.total_seeds {
            "partial"
        } else {
            "ok"
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            format_sig(row.h),
            format_sig(row.rho),
            row.kind.tag(),
            format_sig(row.bin_lo),
            format_sig(row.bin_hi),
            mean,
            std,
            format_sig(row.n_nodes),
            flag
        ));
    }
    out
}

/// Record of one CLI run: what was asked, what came out, and how to verify
/// it. Written atomically as a sidecar next to each output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub library_version: String,
    pub timestamp_utc: String,
    pub outputs: Vec<OutputDigest>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

impl RunManifest {
    pub fn new(command: String, config: serde_json::Value, seeds: Vec<u64>) -> Self {
        RunManifest {
            command,
            config,
            seeds,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_utc: chrono::Utc::now().to_rfc3339(),
            outputs: Vec::new(),
        }
    }

    /// Digest an already-written output file into the manifest.
    pub fn record_output(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        self.outputs.push(OutputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Write `<output>.manifest.json` next to the given output file.
    pub fn write_sidecar(&self, output_path: impl AsRef<Path>) -> Result<PathBuf> {
        let mut name = output_path.as_ref().as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(e.to_string()))?;
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }

    /// Check every recorded digest against the file currently on disk.
    pub fn verify_outputs(&self) -> Result<()> {
        for output in &self.outputs {
            let bytes = fs::read(&output.path)?;
            let actual = sha256_hex(&bytes);
            if actual != output.sha256 {
                return Err(Error::Validation(format!(
                    "digest mismatch for {}: manifest {} vs file {}",
                    output.path, output.sha256, actual
                )));
            }
        }
        Ok(())
    }
}
