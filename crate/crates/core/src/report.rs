//! Structured outputs: run manifests, curve records and JSON writing.
//!
//! JSON floats are written in scientific notation with 17 significant digits
//! so every value reads back bit-identical. Output never contains timestamps,
//! so equal manifests give byte-identical files.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use sha2::{Digest, Sha256};

use crate::curve::CurvePoint;
use crate::edc::{EdcCurve, ErrorMode};
use crate::error::Result;
use crate::score_data::ComparisonKind;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Compact JSON with floats printed as `{:.16e}`.
struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = to_json_string(value)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}

/// Hex SHA-256 of a file's contents.
pub fn file_digest(path: &Path) -> Result<String> {
    let mut file = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(Self {
            path: path.display().to_string(),
            sha256: file_digest(path)?,
        })
    }
}

/// Everything needed to replay a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub toolkit_version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            command: command.to_owned(),
            toolkit_version: TOOLKIT_VERSION.to_owned(),
            seed,
            config,
            inputs: Vec::new(),
        }
    }

    pub fn with_input(mut self, path: &Path) -> Result<Self> {
        self.inputs.push(InputDigest::of(path)?);
        Ok(self)
    }
}

/// One serialised EDC with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub algorithm: String,
    pub kind: ComparisonKind,
    pub error_mode: ErrorMode,
    pub threshold: f64,
    pub starting_error_target: f64,
    pub starting_error: f64,
    pub total_comparisons: usize,
    pub points: Vec<CurvePoint>,
}

impl CurveRecord {
    pub fn new(algorithm: &str, starting_error_target: f64, curve: EdcCurve) -> Self {
        Self {
            algorithm: algorithm.to_owned(),
            kind: curve.kind,
            error_mode: curve.error_mode,
            threshold: curve.threshold,
            starting_error_target,
            starting_error: curve.starting_error,
            total_comparisons: curve.total_comparisons,
            points: curve.points,
        }
    }

    pub fn to_curve(&self) -> EdcCurve {
        EdcCurve {
            kind: self.kind,
            error_mode: self.error_mode,
            threshold: self.threshold,
            starting_error: self.starting_error,
            total_comparisons: self.total_comparisons,
            points: self.points.clone(),
        }
    }
}

/// Output of the `edc` and `baseline` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub manifest: RunManifest,
    pub curves: Vec<CurveRecord>,
}
