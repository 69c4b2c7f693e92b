//! Finite metric measure spaces and their validation.

use std::fmt;

use serde::Serialize;

use super::scalar::{sum_in, Mode, Scalar};
use crate::error::{MmError, Result};

/// One violated axiom, with 0-based point indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonzeroDiagonal { i: usize },
    Asymmetric { i: usize, j: usize },
    NegativeDistance { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
    NegativeMass { i: usize },
    UnmergedZeroDistance { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonzeroDiagonal { i } => write!(f, "dist[{i}][{i}] != 0"),
            Violation::Asymmetric { i, j } => write!(f, "dist[{i}][{j}] != dist[{j}][{i}]"),
            Violation::NegativeDistance { i, j } => write!(f, "dist[{i}][{j}] < 0"),
            Violation::Triangle { i, j, k } => {
                write!(f, "triangle inequality fails: dist[{i}][{k}] > dist[{i}][{j}] + dist[{j}][{k}]")
            }
            Violation::NegativeMass { i } => write!(f, "mass[{i}] < 0"),
            Violation::UnmergedZeroDistance { i, j } => {
                write!(f, "points {i} and {j} are at distance 0")
            }
        }
    }
}

/// Outcome of [`validate`]: empty iff the data is a valid space.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub is_ultrametric: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when the only problems are zero-distance pairs, which
    /// canonicalization removes by merging.
    pub fn is_pseudo_valid(&self) -> bool {
        self.violations
            .iter()
            .all(|v| matches!(v, Violation::UnmergedZeroDistance { .. }))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks arbitrary candidate data against the axioms of a finite mm space.
///
/// Shape problems (non-square matrix, length mismatch, mixed modes) are
/// reported as a structural error rather than as violations.
pub fn validate(dist: &[Vec<Scalar>], mass: &[Scalar]) -> Result<ValidationReport> {
    let n = mass.len();
    if dist.len() != n {
        return Err(MmError::Structure(format!(
            "distance matrix has {} rows but there are {n} masses",
            dist.len()
        )));
    }
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(MmError::Structure(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
    }
    homogeneous_mode(dist.iter().flatten().chain(mass.iter()))?;

    let mut violations = Vec::new();
    for i in 0..n {
        if !dist[i][i].is_zero() {
            violations.push(Violation::NonzeroDiagonal { i });
        }
        if mass[i].is_negative() {
            violations.push(Violation::NegativeMass { i });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[i][j] != dist[j][i] {
                violations.push(Violation::Asymmetric { i, j });
            }
            if dist[i][j].is_negative() {
                violations.push(Violation::NegativeDistance { i, j });
            } else if dist[i][j].is_zero() {
                violations.push(Violation::UnmergedZeroDistance { i, j });
            }
        }
    }
    let mut ultra = true;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                let via = &dist[i][j] + &dist[j][k];
                if dist[i][k] > via && i < k {
                    violations.push(Violation::Triangle { i, j, k });
                }
                let mx = dist[i][j].clone().max(dist[j][k].clone());
                if dist[i][k] > mx {
                    ultra = false;
                }
            }
        }
    }
    Ok(ValidationReport {
        violations,
        is_ultrametric: ultra,
    })
}

pub(crate) fn homogeneous_mode<'a>(values: impl Iterator<Item = &'a Scalar>) -> Result<Mode> {
    let mut mode: Option<Mode> = None;
    for v in values {
        match mode {
            None => mode = Some(v.mode()),
            Some(m) if m != v.mode() => {
                return Err(MmError::ModeMismatch(m.to_string(), v.mode().to_string()))
            }
            _ => {}
        }
    }
    Ok(mode.unwrap_or(Mode::Exact))
}

/// A finite metric measure space `[X, r, mu]`.
///
/// Construction enforces the pseudometric axioms and nonnegative masses.
/// Zero-distance pairs and zero masses are tolerated until
/// [`canonicalize`](super::canon::canonicalize) merges or drops them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMmSpace {
    labels: Vec<String>,
    dist: Vec<Scalar>,
    mass: Vec<Scalar>,
    mode: Mode,
    ultrametric: bool,
}

impl FiniteMmSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Scalar>>, mass: Vec<Scalar>) -> Result<Self> {
        if labels.len() != mass.len() {
            return Err(MmError::Structure(format!(
                "{} labels for {} points",
                labels.len(),
                mass.len()
            )));
        }
        let report = validate(&dist, &mass)?;
        if !report.is_pseudo_valid() {
            return Err(MmError::Invalid(report));
        }
        let mode = homogeneous_mode(dist.iter().flatten().chain(mass.iter()))?;
        Ok(Self {
            labels,
            dist: dist.into_iter().flatten().collect(),
            mass,
            mode,
            ultrametric: report.is_ultrametric,
        })
    }

    /// Builds a space with default labels `0..n`.
    pub fn from_rows(dist: Vec<Vec<Scalar>>, mass: Vec<Scalar>) -> Result<Self> {
        let labels = (0..mass.len()).map(|i| i.to_string()).collect();
        Self::new(labels, dist, mass)
    }

    /// Float-mode convenience constructor.
    pub fn from_f64(dist: &[Vec<f64>], mass: &[f64]) -> Result<Self> {
        let d = dist
            .iter()
            .map(|row| row.iter().map(|&v| Scalar::float(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let m = mass.iter().map(|&v| Scalar::float(v)).collect::<Result<Vec<_>>>()?;
        Self::from_rows(d, m)
    }

    /// Exact-mode convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_ratios(dist: &[Vec<(i64, i64)>], mass: &[(i64, i64)]) -> Result<Self> {
        let d = dist
            .iter()
            .map(|row| row.iter().map(|&(p, q)| Scalar::ratio(p, q)).collect())
            .collect();
        let m = mass.iter().map(|&(p, q)| Scalar::ratio(p, q)).collect();
        Self::from_rows(d, m)
    }

    /// Single point carrying `mass`.
    pub fn point(mass: Scalar) -> Self {
        let mode = mass.mode();
        Self {
            labels: vec!["0".into()],
            dist: vec![Scalar::zero(mode)],
            mass: vec![mass],
            mode,
            ultrametric: true,
        }
    }

    /// The space with no points (the zero element once canonicalized).
    pub fn empty(mode: Mode) -> Self {
        Self {
            labels: Vec::new(),
            dist: Vec::new(),
            mass: Vec::new(),
            mode,
            ultrametric: true,
        }
    }

    /// Assembles a space whose invariants the caller has already established.
    pub(crate) fn from_parts_unchecked(
        labels: Vec<String>,
        dist: Vec<Scalar>,
        mass: Vec<Scalar>,
        mode: Mode,
        ultrametric: bool,
    ) -> Self {
        debug_assert_eq!(dist.len(), mass.len() * mass.len());
        Self {
            labels,
            dist,
            mass,
            mode,
            ultrametric,
        }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_ultrametric(&self) -> bool {
        self.ultrametric
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(MmError::Structure("label count mismatch".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> &Scalar {
        &self.dist[i * self.len() + j]
    }

    pub fn mass(&self, i: usize) -> &Scalar {
        &self.mass[i]
    }

    pub fn masses(&self) -> &[Scalar] {
        &self.mass
    }

    pub fn rows(&self) -> Vec<Vec<Scalar>> {
        let n = self.len();
        (0..n)
            .map(|i| self.dist[i * n..(i + 1) * n].to_vec())
            .collect()
    }

    pub fn total_mass(&self) -> Scalar {
        sum_in(self.mode, self.mass.iter().cloned())
    }

    /// Indices with positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.mass[i].is_positive()).collect()
    }

    pub fn dist_f64(&self) -> Vec<f64> {
        self.dist.iter().map(Scalar::to_f64).collect()
    }

    pub fn mass_f64(&self) -> Vec<f64> {
        self.mass.iter().map(Scalar::to_f64).collect()
    }

    /// Re-validates, including the zero-distance check.
    pub fn validate(&self) -> ValidationReport {
        validate(&self.rows(), &self.mass).expect("constructed spaces are well-shaped")
    }

    /// The same space with every entry converted to `mode`.
    pub fn to_mode(&self, mode: Mode) -> FiniteMmSpace {
        if mode == self.mode {
            return self.clone();
        }
        Self {
            labels: self.labels.clone(),
            dist: self.dist.iter().map(|v| v.to_mode(mode)).collect(),
            mass: self.mass.iter().map(|v| v.to_mode(mode)).collect(),
            mode,
            ultrametric: self.ultrametric,
        }
    }

    /// Subspace on the given indices, in the given order.
    pub fn restrict(&self, idx: &[usize]) -> FiniteMmSpace {
        let m = idx.len();
        let mut dist = Vec::with_capacity(m * m);
        for &i in idx {
            for &j in idx {
                dist.push(self.dist(i, j).clone());
            }
        }
        Self {
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            dist,
            mass: idx.iter().map(|&i| self.mass[i].clone()).collect(),
            mode: self.mode,
            ultrametric: self.ultrametric,
        }
    }

    /// Same points and metric, new masses.
    pub(crate) fn with_masses(&self, mass: Vec<Scalar>) -> FiniteMmSpace {
        Self {
            mass,
            ..self.clone()
        }
    }
}
