//! Coefficient files and CSV data.
//!
//! Coefficient files are JSON:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "d": 100, "K": 256, "method": "S-L2-H1", "tau": 1e-6, "L": 1024, "J": null,
//!   "kernel": { "name": "gauss", "c": 1.0 },
//!   "scale": 1.0,
//!   "coefficients": [ ... ]
//! }
//! ```
//!
//! `kernel` is the string `"custom"` for fits of user-supplied targets.
//! Floats are written as the shortest decimal that parses back to the same
//! bits. Data files are headerless CSV, one point per row; lines starting
//! with `#` are comments.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelName, KernelSpec};
use crate::sliceop::{CosineCoefficients, FitInfo, FitMethod, Norm};
use crate::specfun::Dimension;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelEntry {
    Named { name: String, c: f64 },
    Tag(String),
}

/// On-disk form of a [`CosineCoefficients`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    pub format_version: u32,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub method: String,
    pub tau: f64,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[serde(rename = "J")]
    pub j: Option<usize>,
    pub kernel: KernelEntry,
    pub scale: f64,
    pub coefficients: Vec<f64>,
}

fn parse_method(label: &str) -> Result<(FitMethod, Norm, Norm)> {
    let norm = |s: &str| match s {
        "L2" => Ok(Norm::L2),
        "H1" => Ok(Norm::H1),
        _ => Err(Error::Format(format!("unknown norm '{s}' in method '{label}'"))),
    };
    match label {
        "direct" => Ok((FitMethod::Direct, Norm::L2, Norm::L2)),
        "analytic" => Ok((FitMethod::Analytic, Norm::L2, Norm::L2)),
        _ => {
            let parts: Vec<&str> = label.split('-').collect();
            let method = match parts.first() {
                Some(&"S") if parts.len() == 3 => FitMethod::Spatial,
                Some(&"F") if parts.len() == 3 => FitMethod::Frequency,
                _ => return Err(Error::Format(format!("unknown method '{label}'"))),
            };
            Ok((method, norm(parts[1])?, norm(parts[2])?))
        }
    }
}

impl CoefficientFile {
    pub fn from_coefficients(a: &CosineCoefficients) -> Result<Self> {
        if a.info.method == FitMethod::Manual {
            return Err(Error::argument(
                "hand-made coefficients have no method tag; record them as direct or analytic",
            ));
        }
        let kernel = match &a.info.kernel {
            Some(label) => KernelEntry::Named { name: label.name.clone(), c: label.c },
            None => KernelEntry::Tag("custom".into()),
        };
        Ok(CoefficientFile {
            format_version: FORMAT_VERSION,
            d: a.dimension().get(),
            k: a.len(),
            method: a.info.method_label(),
            tau: a.info.tau,
            l: a.info.quadrature_nodes,
            j: a.info.range_modes,
            kernel,
            scale: a.info.scale,
            coefficients: a.coefficients().to_vec(),
        })
    }

    /// Validate and convert to coefficients.
    pub fn to_coefficients(&self) -> Result<CosineCoefficients> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let d = Dimension::new(self.d).map_err(|e| Error::Format(e.to_string()))?;
        if self.coefficients.len() != self.k {
            return Err(Error::Format(format!(
                "K = {} but {} coefficients are given",
                self.k,
                self.coefficients.len()
            )));
        }
        if let Some(i) = self.coefficients.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("coefficient {i} is not finite")));
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::Format(format!("tau must be a non-negative number, got {}", self.tau)));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::Format(format!("scale must be positive, got {}", self.scale)));
        }
        let kernel = match &self.kernel {
            KernelEntry::Named { name, c } => {
                let spec = name
                    .parse::<KernelName>()
                    .and_then(|n| KernelSpec::new(n, *c))
                    .map_err(|e| Error::Format(e.to_string()))?;
                Some(spec.label())
            }
            KernelEntry::Tag(tag) if tag == "custom" => None,
            KernelEntry::Tag(tag) => {
                return Err(Error::Format(format!("kernel must be {{name, c}} or \"custom\", got \"{tag}\"")))
            }
        };
        let (method, range_norm, domain_norm) = parse_method(&self.method)?;
        let info = FitInfo {
            method,
            tau: self.tau,
            domain_norm,
            range_norm,
            kernel,
            scale: self.scale,
            quadrature_nodes: self.l,
            range_modes: self.j,
        };
        CosineCoefficients::with_info(self.coefficients.clone(), d, info).map_err(|e| Error::Format(e.to_string()))
    }

    /// The catalog kernel, or `None` for custom fits.
    pub fn kernel_spec(&self) -> Result<Option<KernelSpec>> {
        match &self.kernel {
            KernelEntry::Named { name, c } => Ok(Some(KernelSpec::new(name.parse()?, *c)?)),
            KernelEntry::Tag(_) => Ok(None),
        }
    }
}

pub fn write_coefficients(path: &Path, a: &CosineCoefficients) -> Result<()> {
    let file = CoefficientFile::from_coefficients(a)?;
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &file).map_err(|e| Error::Io(e.into()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn parse_coefficients(text: &str) -> Result<CoefficientFile> {
    let file: CoefficientFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.to_coefficients()?;
    Ok(file)
}

pub fn read_coefficients(path: &Path) -> Result<CoefficientFile> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_coefficients(&text).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Rows of a headerless numeric CSV. Every row must have `width` fields if
/// given, otherwise the width of the first row.
pub fn parse_matrix(text: &str, width: Option<usize>, source: &str) -> Result<(usize, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut width = width;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::input(format!("{source}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::input(format!("{source}:{line}: expected {w} fields, found {}", record.len())));
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::input(format!("{source}:{line}: field {} is not a number: '{field}'", col + 1)))?;
            if !v.is_finite() {
                return Err(Error::input(format!("{source}:{line}: field {} is not finite ({field})", col + 1)));
            }
            values.push(v);
        }
    }
    match width {
        Some(w) if !values.is_empty() => Ok((w, values)),
        _ => Err(Error::input(format!("{source}: no data rows"))),
    }
}

pub fn read_matrix(path: &Path, width: Option<usize>) -> Result<(usize, Vec<f64>)> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_matrix(&text, width, &path.display().to_string())
}

/// Write `columns` side by side after `# `-prefixed comment lines.
pub fn write_columns(path: &Path, comments: &[String], header: Option<&[&str]>, columns: &[&[f64]]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    if let Some(h) = header {
        writeln!(out, "{}", h.join(","))?;
    }
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| c[i].to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}
