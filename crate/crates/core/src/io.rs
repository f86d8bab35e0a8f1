//! Stable on-disk formats and atomic output handling.
//!
//! CSV files always carry a header row, use a fixed column order, end every
//! line with `\n`, and print floats with 17 significant digits. Absent values
//! are empty fields.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::stats::{FitKind, FitResult, Histogram, Regime, WealthSample};
use crate::sweep::PhaseDiagram;
use crate::uniform_map::Orbit;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Round-trippable decimal with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn sample_csv(sample: &WealthSample) -> String {
    let mut out = String::with_capacity(sample.len() * 24 + 2);
    out.push_str("x\n");
    for &x in sample.values() {
        out.push_str(&fmt_f64(x));
        out.push('\n');
    }
    out
}

pub fn histogram_csv(hist: &Histogram) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (w, c) in hist.edges.windows(2).zip(&hist.counts) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(w[0]), fmt_f64(w[1]), c);
    }
    out
}

pub const PHASE_HEADER: &str = "a,r,label,mu,h,alpha,gini,mean,std,n_pooled";

pub fn phase_csv(diagram: &PhaseDiagram) -> String {
    let mut out = String::from(PHASE_HEADER);
    out.push('\n');
    for c in &diagram.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(c.a),
            fmt_f64(c.r),
            c.label,
            fmt_opt(c.mu),
            fmt_opt(c.h),
            fmt_opt(c.alpha),
            fmt_opt(c.gini),
            fmt_opt(c.mean),
            fmt_opt(c.std),
            c.n_pooled
        );
    }
    out
}

pub fn bifurcation_csv(orbits: &[Orbit]) -> String {
    let mut out = String::from("r,x\n");
    for o in orbits {
        let r = fmt_f64(o.params.r());
        for &x in &o.samples {
            let _ = writeln!(out, "{r},{}", fmt_f64(x));
        }
    }
    out
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub label: Regime,
    pub kind: Option<FitKind>,
    pub mu: Option<f64>,
    pub h: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_bar: Option<f64>,
    pub xmin: Option<f64>,
    pub ks_distance: Option<f64>,
    pub n_tail: Option<usize>,
}

impl FitReport {
    pub fn new(label: Regime, fit: Option<&FitResult>) -> Self {
        Self {
            label,
            kind: fit.map(|f| f.kind),
            mu: fit.and_then(|f| f.mu),
            h: fit.and_then(|f| f.h),
            alpha: fit.and_then(|f| f.alpha),
            alpha_bar: fit.and_then(|f| f.alpha_bar),
            xmin: fit.map(|f| f.xmin),
            ks_distance: fit.map(|f| f.ks_distance),
            n_tail: fit.map(|f| f.n_tail),
        }
    }
}

/// Contents of `stats.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub label: Regime,
    pub mean: f64,
    pub std: f64,
    pub gini: Option<f64>,
    /// Temperature of the exponential fit over the whole sample.
    pub h: Option<f64>,
    pub n_pooled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    pub base_seed: u64,
    pub version: String,
    pub duration_secs: f64,
    pub outputs: Vec<OutputDigest>,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that records a digest for every file it writes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<OutputDigest>,
}

impl OutputDir {
    pub const MANIFEST: &'static str = "manifest.json";

    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(name), bytes)?;
        self.written.push(OutputDigest {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &json_bytes(value)?)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(
        self,
        command_line: Vec<String>,
        config: serde_json::Value,
        base_seed: u64,
        duration_secs: f64,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            command_line,
            config,
            base_seed,
            version: VERSION.to_string(),
            duration_secs,
            outputs: self.written,
        };
        write_atomic(&self.root.join(Self::MANIFEST), &json_bytes(&manifest)?)?;
        Ok(manifest)
    }
}
