//! Semigroup actions and the two ways of combining spaces.

use super::canon::canonicalize;
use super::scalar::{Mode, Scalar};
use super::space::FiniteMmSpace;
use crate::error::{MmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionKind {
    /// `a * x = [X, a r, mu]`
    Metric,
    /// `a . x = [X, r, a mu]`
    Measure,
}

/// Scales distances or masses by `a >= 0`.
pub fn scalar_action(kind: ActionKind, a: &Scalar, x: &FiniteMmSpace) -> Result<FiniteMmSpace> {
    if a.is_negative() {
        return Err(MmError::Parameter(format!("scaling factor {a} is negative")));
    }
    let n = x.len();
    let mode = if a.mode() == Mode::Float { Mode::Float } else { x.mode() };
    let x = x.to_mode(mode);
    let a = a.to_mode(mode);
    let out = match kind {
        ActionKind::Metric => {
            let mut dist = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    dist.push(&a * x.dist(i, j));
                }
            }
            FiniteMmSpace::from_parts_unchecked(
                x.labels().to_vec(),
                dist,
                x.masses().to_vec(),
                mode,
                x.is_ultrametric(),
            )
        }
        ActionKind::Measure => {
            let mass = x.masses().iter().map(|m| &a * m).collect();
            x.with_masses(mass)
        }
    };
    Ok(out)
}

/// Exponent of the product metric `(r_X^p + r_Y^p)^(1/p)`.
#[derive(Clone, Debug, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "infinity" | "∞" | "max" => Ok(LpExponent::Infinity),
            t => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| MmError::Parameter(format!("bad exponent {t:?}")))?;
                Ok(LpExponent::Finite(p))
            }
        }
    }
}

/// Cartesian product with the `l_p` combination of metrics and product measure.
///
/// `p = 1` and `p = inf` keep exact spaces exact; any other exponent yields a
/// float space.
pub fn box_plus(x: &FiniteMmSpace, y: &FiniteMmSpace, p: &LpExponent) -> Result<FiniteMmSpace> {
    if let LpExponent::Finite(v) = p {
        if !(*v >= 1.0) || !v.is_finite() {
            return Err(MmError::Parameter(format!("l_p exponent {v} must be >= 1")));
        }
    }
    let exact_ok = matches!(p, LpExponent::Infinity) || *p == LpExponent::Finite(1.0);
    let mode = if x.mode() == Mode::Exact && y.mode() == Mode::Exact && exact_ok {
        Mode::Exact
    } else {
        Mode::Float
    };
    let (x, y) = (x.to_mode(mode), y.to_mode(mode));
    let (nx, ny) = (x.len(), y.len());
    let n = nx * ny;
    let mut labels = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    for i in 0..nx {
        for j in 0..ny {
            labels.push(format!("({},{})", x.labels()[i], y.labels()[j]));
            mass.push(x.mass(i) * y.mass(j));
        }
    }
    let mut dist = Vec::with_capacity(n * n);
    for a in 0..n {
        let (i, j) = (a / ny, a % ny);
        for b in 0..n {
            let (k, l) = (b / ny, b % ny);
            let (dx, dy) = (x.dist(i, k), y.dist(j, l));
            let d = match p {
                LpExponent::Infinity => dx.clone().max(dy.clone()),
                LpExponent::Finite(v) if *v == 1.0 => dx + dy,
                LpExponent::Finite(v) => Scalar::Float(
                    (dx.to_f64().powf(*v) + dy.to_f64().powf(*v)).powf(1.0 / v),
                ),
            };
            dist.push(d);
        }
    }
    let rows: Vec<Vec<Scalar>> = dist.chunks(n.max(1)).map(|c| c.to_vec()).collect();
    let rows = if n == 0 { Vec::new() } else { rows };
    let prod = FiniteMmSpace::new(labels, rows, mass)?;
    Ok(canonicalize(&prod))
}

/// h-concatenation: disjoint union of two ultrametric spaces bounded by `h`,
/// with every cross distance equal to `h`.
pub fn concat_h(x: &FiniteMmSpace, y: &FiniteMmSpace, h: &Scalar) -> Result<FiniteMmSpace> {
    if !h.is_positive() {
        return Err(MmError::Parameter(format!("h = {h} must be positive")));
    }
    for (name, s) in [("left", x), ("right", y)] {
        if !s.is_ultrametric() {
            return Err(MmError::Concat(format!("{name} input is not ultrametric")));
        }
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                if s.dist(i, j) > h {
                    return Err(MmError::Concat(format!(
                        "{name} input has dist({i},{j}) = {} > h = {h}",
                        s.dist(i, j)
                    )));
                }
            }
        }
    }
    let mode = if x.mode() == Mode::Exact && y.mode() == Mode::Exact && h.mode() == Mode::Exact {
        Mode::Exact
    } else {
        Mode::Float
    };
    let (x, y, h) = (x.to_mode(mode), y.to_mode(mode), h.to_mode(mode));
    let (nx, ny) = (x.len(), y.len());
    let n = nx + ny;
    let mut dist = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let d = match (a < nx, b < nx) {
                (true, true) => x.dist(a, b).clone(),
                (false, false) => y.dist(a - nx, b - nx).clone(),
                _ => h.clone(),
            };
            dist.push(d);
        }
    }
    let labels = x
        .labels()
        .iter()
        .map(|l| format!("L{l}"))
        .chain(y.labels().iter().map(|l| format!("R{l}")))
        .collect();
    let mass = x.masses().iter().chain(y.masses()).cloned().collect();
    Ok(FiniteMmSpace::from_parts_unchecked(labels, dist, mass, mode, true))
}
