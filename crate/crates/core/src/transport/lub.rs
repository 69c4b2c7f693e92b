//! Least upper bound of two probability spaces from an optimal coupling.

use serde::Serialize;

use super::eurandom::{eurandom, eurandom_objective, EurandomConfig, EurandomResult};
use crate::error::{MmError, Result};
use crate::mmcore::canon::canonicalize;
use crate::mmcore::scalar::Scalar;
use crate::mmcore::space::FiniteMmSpace;
use crate::order::{le_metric, CheckOptions};

/// Coupling entries at or below this fraction of the total mass are dropped.
const ATOM_CUTOFF: f64 = 1e-14;

#[derive(Clone, Debug, Serialize)]
pub struct LubReport {
    pub lambda: f64,
    /// `x1 ≤metric zbar` and `x2 ≤metric zbar`.
    pub le_metric: [bool; 2],
    pub d12: f64,
    pub d1z: f64,
    pub dz2: f64,
    /// `|d12 - (d1z + dz2)|`.
    pub residual: f64,
    /// Objective of the coupling that built `zbar`; equals `d1z + dz2` exactly
    /// in theory for any coupling.
    pub coupling_value: f64,
    /// All three distance computations were certified.
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct Lub {
    pub zbar: FiniteMmSpace,
    pub report: LubReport,
    pub coupling: EurandomResult,
}

/// Builds `zbar = [X1 × X2, max(r1, r2), Q]` from the best Eurandom coupling `Q`
/// of `x1` and `x2` and reports how it relates to both inputs.
///
/// With `best_effort` unset an uncertified coupling is an error.
pub fn lub(
    x1: &FiniteMmSpace,
    x2: &FiniteMmSpace,
    lambda: f64,
    cfg: &EurandomConfig,
    best_effort: bool,
) -> Result<Lub> {
    for (name, s) in [("first", x1), ("second", x2)] {
        let m = s.total_mass().to_f64();
        if (m - 1.0).abs() > cfg.mass_tol {
            return Err(MmError::Parameter(format!(
                "{name} space must be a probability space (mass {m})"
            )));
        }
    }
    let q = eurandom(x1, x2, lambda, cfg)?;
    if !q.certified && !best_effort {
        return Err(MmError::Infeasible(format!(
            "coupling not certified (gap {:.3e}); rerun with best effort",
            q.upper_bound - q.lower_bound
        )));
    }
    let c = &q.coupling;
    let mut cells = Vec::new();
    for (a, &i) in c.x_index.iter().enumerate() {
        for (b, &j) in c.y_index.iter().enumerate() {
            let w = c.plan.get(a, b);
            if w > ATOM_CUTOFF {
                cells.push((i, j, w));
            }
        }
    }
    let total: f64 = cells.iter().map(|c| c.2).sum();
    let mut rows = Vec::with_capacity(cells.len());
    for &(i, j, _) in &cells {
        rows.push(
            cells
                .iter()
                .map(|&(k, l, _)| Scalar::Float(x1.dist(i, k).to_f64().max(x2.dist(j, l).to_f64())))
                .collect(),
        );
    }
    let labels = cells
        .iter()
        .map(|&(i, j, _)| format!("({},{})", x1.labels()[i], x2.labels()[j]))
        .collect();
    let mass = cells.iter().map(|c| Scalar::Float(c.2 / total)).collect();
    let zbar = canonicalize(&FiniteMmSpace::new(labels, rows, mass)?);

    let opts = CheckOptions::with_tol(1e-9);
    let le1 = le_metric(x1, &zbar, opts)?.verdict;
    let le2 = le_metric(x2, &zbar, opts)?.verdict;
    let r1z = eurandom(x1, &zbar, lambda, cfg)?;
    let rz2 = eurandom(&zbar, x2, lambda, cfg)?;
    let d12 = q.upper_bound;
    let (d1z, dz2) = (r1z.upper_bound, rz2.upper_bound);
    let report = LubReport {
        lambda,
        le_metric: [le1, le2],
        d12,
        d1z,
        dz2,
        residual: (d12 - (d1z + dz2)).abs(),
        coupling_value: eurandom_objective(x1, x2, lambda, c)?,
        certified: q.certified && r1z.certified && rz2.certified,
    };
    Ok(Lub {
        zbar,
        report,
        coupling: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmcore::canon::is_equivalent;
    use crate::mmcore::ops::{scalar_action, ActionKind};

    fn x1() -> FiniteMmSpace {
        FiniteMmSpace::from_ratios(&[vec![(0, 1), (1, 1)], vec![(1, 1), (0, 1)]], &[(1, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn lub_with_itself() {
        let l = lub(&x1(), &x1(), 1.0, &EurandomConfig::default(), false).unwrap();
        assert!(is_equivalent(&l.zbar, &x1(), Some(1e-9)).unwrap().0);
        assert_eq!(l.report.le_metric, [true, true]);
        assert!(l.report.residual < 1e-9);
    }

    #[test]
    fn lub_with_dominating_space() {
        let y = scalar_action(ActionKind::Metric, &Scalar::int(2), &x1()).unwrap();
        let l = lub(&x1(), &y, 1.0, &EurandomConfig::default(), false).unwrap();
        assert!(is_equivalent(&l.zbar, &y, Some(1e-9)).unwrap().0, "{:?}", l.zbar);
        assert!(l.report.certified);
        assert!(l.report.residual < 1e-6);
    }

    #[test]
    fn requires_probability_spaces() {
        let heavy = FiniteMmSpace::point(Scalar::int(2));
        assert!(lub(&heavy, &heavy, 1.0, &EurandomConfig::default(), true).is_err());
    }
}
