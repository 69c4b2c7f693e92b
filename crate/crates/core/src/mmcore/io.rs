//! JSON space files.
//!
//! ```json
//! { "mode": "exact", "points": [{"label": "a", "mass": "1/2"}, …], "dist": [["0", "1"], …] }
//! ```
//!
//! Exact files carry `"p/q"` strings (integers may also be bare JSON
//! integers); float files carry JSON numbers. Matrices are full and row-major.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::scalar::{Mode, Scalar};
use super::space::FiniteMmSpace;
use crate::error::{MmError, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointFile {
    label: String,
    mass: Value,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    mode: Mode,
    points: Vec<PointFile>,
    dist: Vec<Vec<Value>>,
}

fn parse_value(v: &Value, mode: Mode, field: &str) -> Result<Scalar> {
    let s = match v {
        Value::String(s) => Scalar::parse(s)?,
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                match mode {
                    Mode::Exact => Scalar::int(i),
                    Mode::Float => Scalar::Float(i as f64),
                }
            } else {
                Scalar::float(n.as_f64().ok_or_else(|| MmError::Schema(format!("{field}: bad number")))?)?
            }
        }
        other => return Err(MmError::Schema(format!("{field}: expected number or string, got {other}"))),
    };
    if s.mode() != mode {
        return Err(MmError::Schema(format!(
            "{field}: value {s} is {} but the file declares mode {mode}",
            s.mode()
        )));
    }
    Ok(s)
}

fn encode_value(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(_) => Value::String(s.to_string()),
        Scalar::Float(v) => serde_json::Number::from_f64(*v)
            .map(Value::Number)
            .unwrap_or(Value::Null),
    }
}

/// Parsed file contents before the mm-space axioms are checked.
#[derive(Clone, Debug)]
pub struct RawSpace {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<Scalar>>,
    pub mass: Vec<Scalar>,
}

/// Parses JSON text without checking the axioms (see [`validate`](super::validate)).
pub fn raw_from_json(text: &str) -> Result<RawSpace> {
    let file: SpaceFile = serde_json::from_str(text).map_err(|e| {
        MmError::Schema(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    let mode = file.mode;
    let mut labels = Vec::with_capacity(file.points.len());
    let mut mass = Vec::with_capacity(file.points.len());
    for (i, p) in file.points.iter().enumerate() {
        labels.push(p.label.clone());
        mass.push(parse_value(&p.mass, mode, &format!("points[{i}].mass"))?);
    }
    let mut dist = Vec::with_capacity(file.dist.len());
    for (i, row) in file.dist.iter().enumerate() {
        let parsed = row
            .iter()
            .enumerate()
            .map(|(j, v)| parse_value(v, mode, &format!("dist[{i}][{j}]")))
            .collect::<Result<Vec<_>>>()?;
        dist.push(parsed);
    }
    Ok(RawSpace { labels, dist, mass })
}

/// Parses a space from JSON text and validates it.
pub fn space_from_json(text: &str) -> Result<FiniteMmSpace> {
    let raw = raw_from_json(text)?;
    FiniteMmSpace::new(raw.labels, raw.dist, raw.mass)
}

pub fn space_to_json(space: &FiniteMmSpace) -> String {
    let file = SpaceFile {
        mode: space.mode(),
        points: (0..space.len())
            .map(|i| PointFile {
                label: space.labels()[i].clone(),
                mass: encode_value(space.mass(i)),
            })
            .collect(),
        dist: space
            .rows()
            .iter()
            .map(|row| row.iter().map(encode_value).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("space serializes")
}

fn with_path(path: &Path, e: MmError) -> MmError {
    match e {
        MmError::Schema(msg) => MmError::Schema(format!("{}: {msg}", path.display())),
        other => other,
    }
}

pub fn read_space(path: impl AsRef<Path>) -> Result<FiniteMmSpace> {
    let text = fs::read_to_string(path.as_ref())?;
    space_from_json(&text).map_err(|e| with_path(path.as_ref(), e))
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<RawSpace> {
    let text = fs::read_to_string(path.as_ref())?;
    raw_from_json(&text).map_err(|e| with_path(path.as_ref(), e))
}

pub fn write_space(space: &FiniteMmSpace, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, space_to_json(space) + "\n")?;
    Ok(())
}
