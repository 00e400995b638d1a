//! CSV and JSON artifacts. Numbers use the shortest decimal that round-trips,
//! so identical data always produces identical bytes. Files are written to a
//! temporary sibling and renamed into place, so a failed write leaves nothing
//! behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{OscillationProfile, PartitionSample};
use crate::spectrum::{LimitCertificate, SpectrumBatch, TailBound};
use crate::zeta::poles::PoleEstimate;
use crate::zeta::ZetaPoint;

/// Shortest round-trip decimal for `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// A CSV field, quoted when it contains a delimiter or quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write `bytes` to `path` atomically, creating parent directories.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("path has no file name")))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn spectrum_csv(batch: &SpectrumBatch) -> String {
    let mut out = String::from("index,value,multiplicity\n");
    for (i, p) in batch.pairs().iter().enumerate() {
        writeln!(out, "{},{},{}", i + 1, fmt_f64(p.value), p.multiplicity).unwrap();
    }
    out
}

/// Sidecar for a spectrum CSV: completeness cutoff, tail bound and limit certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub model: String,
    pub pairs: usize,
    pub total_count: u128,
    pub lambda_min: f64,
    pub cutoff: f64,
    pub tail: TailBound,
    pub certificates: Option<Vec<LimitCertificate>>,
}

impl From<&SpectrumBatch> for SpectrumMeta {
    fn from(b: &SpectrumBatch) -> Self {
        SpectrumMeta {
            model: b.model.name.clone(),
            pairs: b.pairs().len(),
            total_count: b.total_count(),
            lambda_min: b.lambda_min,
            cutoff: b.cutoff,
            tail: b.tail,
            certificates: b.certificates.clone(),
        }
    }
}

pub fn trace_csv(samples: &[PartitionSample]) -> String {
    let mut out = String::from("t,Z,truncation_error\n");
    for s in samples {
        writeln!(
            out,
            "{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.value),
            fmt_f64(s.truncation_error)
        )
        .unwrap();
    }
    out
}

/// `t, W(t) = Z(t) t^a` and the truncation bound scaled the same way.
pub fn weyl_csv(samples: &[PartitionSample], exponent: f64) -> String {
    let mut out = String::from("t,W,truncation_error\n");
    for s in samples {
        let scale = s.t.powf(exponent);
        writeln!(
            out,
            "{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.value * scale),
            fmt_f64(s.truncation_error * scale)
        )
        .unwrap();
    }
    out
}

pub fn zeta_csv(points: &[ZetaPoint]) -> String {
    let mut out = String::from("Re_s,Im_s,gamma,Re_zeta,Im_zeta,error_bound,method\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(p.s.re),
            fmt_f64(p.s.im),
            fmt_f64(p.gamma),
            fmt_f64(p.value.re),
            fmt_f64(p.value.im),
            fmt_f64(p.error_bound),
            p.method.as_str()
        )
        .unwrap();
    }
    out
}

/// One Fourier coefficient of an oscillation profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub k_index: usize,
    pub exponent: f64,
    pub period: f64,
    pub fit_window: (f64, f64),
    pub fit_residual: f64,
    pub samples_per_period: usize,
    pub coefficient_change: f64,
    pub warnings: Vec<String>,
    pub coefficients: Vec<CoefficientRecord>,
}

impl From<&OscillationProfile> for ProfileRecord {
    fn from(p: &OscillationProfile) -> Self {
        ProfileRecord {
            k_index: p.k_index,
            exponent: p.exponent,
            period: p.period,
            fit_window: p.fit_window,
            fit_residual: p.fit_residual,
            samples_per_period: p.samples_per_period,
            coefficient_change: p.coefficient_change,
            warnings: p.warnings.clone(),
            coefficients: p
                .modes()
                .map(|(n, g)| CoefficientRecord { n, re: g.re, im: g.im })
                .collect(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Config(format!("json encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub model: String,
    pub gamma: f64,
    pub region: crate::zeta::poles::Region,
    pub predicted: Vec<PoleEstimate>,
    pub located: Vec<PoleEstimate>,
}

pub fn read_pole_report(path: &Path) -> Result<PoleReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Files written by one command, removed together if the command fails.
#[derive(Debug, Default)]
pub struct ArtifactSet {
    written: Vec<PathBuf>,
}

impl ArtifactSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, path: impl Into<PathBuf>, contents: &str) -> Result<()> {
        let path = path.into();
        write_atomic(&path, contents.as_bytes())?;
        self.written.push(path);
        Ok(())
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }

    /// Remove everything written so far.
    pub fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::spectrum::interval_spectrum;
    use crate::zeta::poles::{PoleSource, Region};

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0, 1e-7, 2.320_947_917_7, f64::MAX, -3.5e300, 5e-324] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn spectrum_header_and_rows() {
        let csv = spectrum_csv(&interval_spectrum(2).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,value,multiplicity");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,9.869604401089358,1"));
    }

    #[test]
    fn atomic_rewrite_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.csv");
        let csv = spectrum_csv(&interval_spectrum(5).unwrap());
        write_atomic(&path, csv.as_bytes()).unwrap();
        let first = fs::read(&path).unwrap();
        write_atomic(&path, csv.as_bytes()).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn write_failure_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = write_atomic(&blocker.join("inner.csv"), b"data").unwrap_err();
        assert!(err.to_string().contains(&*blocker.to_string_lossy()), "{err}");
    }

    #[test]
    fn pole_report_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("poles.json");
        let pole = PoleEstimate {
            position: Complex64::new(1.365_212_388_971_970_7, 7.807_865_200_527_96),
            m: 0,
            n: 1,
            k_index: 0,
            residue: Some(Complex64::new(0.1, -1.0 / 3.0)),
            source: PoleSource::Located,
            match_distance: Some(1.2e-11),
        };
        let report = PoleReport {
            model: "toy(3,5)".into(),
            gamma: 0.0,
            region: Region::new((0.0, 2.0), (-8.0, 8.0)),
            predicted: vec![],
            located: vec![pole],
        };
        let mut set = ArtifactSet::new();
        set.write(&path, &to_json(&report).unwrap()).unwrap();
        assert_eq!(read_pole_report(&path).unwrap(), report);
        set.discard();
        assert!(!path.exists());
    }
}
