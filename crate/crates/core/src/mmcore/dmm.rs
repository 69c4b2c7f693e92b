//! Distance matrix measures `nu^{m,x}` and the pair functional.

use std::collections::BTreeMap;

use super::scalar::{Mode, Scalar};
use super::space::FiniteMmSpace;
use crate::error::{MmError, Result};

/// Default bound on the number of enumerated tuples `n^m`.
pub const DEFAULT_ENUM_LIMIT: f64 = 1e7;

/// Number of upper-triangular entries of an `m x m` matrix.
pub fn pair_count(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Index of entry `(i, j)`, `i < j`, in the row-major upper-triangular flattening.
#[inline]
pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

/// Law of the distance matrix of `m` independent samples, as weighted atoms.
///
/// Keys are upper-triangular flattenings; weights sum to `(total mass)^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteMatrixMeasure {
    pub order: usize,
    pub atoms: BTreeMap<Vec<Scalar>, Scalar>,
}

impl DiscreteMatrixMeasure {
    pub fn total_weight(&self, mode: Mode) -> Scalar {
        super::scalar::sum_in(mode, self.atoms.values().cloned())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

pub(crate) fn check_enum_limit(n: usize, m: usize, limit: f64) -> Result<()> {
    let needed = (n as f64).powi(m as i32);
    if needed > limit {
        return Err(MmError::Guardrail { needed, limit });
    }
    Ok(())
}

/// Visits every ordered `m`-tuple of support points with its mass product.
pub(crate) fn for_each_tuple(
    x: &FiniteMmSpace,
    m: usize,
    mut visit: impl FnMut(&[usize], &Scalar),
) {
    let support = x.support();
    let s = support.len();
    if s == 0 {
        return;
    }
    let mut idx = vec![0usize; m];
    // prefix[k] = product of masses of the first k coordinates
    let mut prefix: Vec<Scalar> = Vec::with_capacity(m + 1);
    prefix.push(Scalar::one(x.mode()));
    for k in 0..m {
        let next = &prefix[k] * x.mass(support[0]);
        prefix.push(next);
    }
    let mut pts = vec![support[0]; m];
    loop {
        visit(&pts, &prefix[m]);
        // odometer increment from the last coordinate
        let mut k = m;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < s {
                break;
            }
            idx[k] = 0;
        }
        for q in k..m {
            pts[q] = support[idx[q]];
            prefix[q + 1] = &prefix[q] * x.mass(pts[q]);
        }
    }
}

pub(crate) fn tuple_matrix(x: &FiniteMmSpace, pts: &[usize]) -> Vec<Scalar> {
    let m = pts.len();
    let mut key = Vec::with_capacity(pair_count(m));
    for i in 0..m {
        for j in (i + 1)..m {
            key.push(x.dist(pts[i], pts[j]).clone());
        }
    }
    key
}

/// Exact enumeration of `nu^{m,x}` over all `n^m` ordered tuples.
pub fn distance_matrix_measure(
    x: &FiniteMmSpace,
    m: usize,
    limit: f64,
) -> Result<DiscreteMatrixMeasure> {
    if m < 2 {
        return Err(MmError::Parameter(format!("order m = {m} must be at least 2")));
    }
    check_enum_limit(x.support().len(), m, limit)?;
    let mut atoms: BTreeMap<Vec<Scalar>, Scalar> = BTreeMap::new();
    for_each_tuple(x, m, |pts, w| {
        let key = tuple_matrix(x, pts);
        atoms
            .entry(key)
            .and_modify(|acc| *acc = &*acc + w)
            .or_insert_with(|| w.clone());
    });
    Ok(DiscreteMatrixMeasure { order: m, atoms })
}

/// `∫ (1 - e^{-lambda r}) nu^{2,x}(dr)` by a direct double sum over points.
pub fn pair_functional(x: &FiniteMmSpace, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(MmError::Parameter(format!("lambda = {lambda} must be positive")));
    }
    Ok(pair_functional_raw(&x.dist_f64(), &x.mass_f64(), lambda))
}

pub(crate) fn pair_functional_raw(dist: &[f64], mass: &[f64], lambda: f64) -> f64 {
    let n = mass.len();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            if i != k {
                acc += mass[i] * mass[k] * (-(-lambda * dist[i * n + k]).exp_m1());
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> FiniteMmSpace {
        FiniteMmSpace::from_ratios(&[vec![(0, 1), (1, 1)], vec![(1, 1), (0, 1)]], &[(1, 2), (1, 2)])
            .unwrap()
    }

    #[test]
    fn pair_index_is_row_major() {
        let m = 4;
        let mut k = 0;
        for i in 0..m {
            for j in (i + 1)..m {
                assert_eq!(pair_index(m, i, j), k);
                k += 1;
            }
        }
        assert_eq!(k, pair_count(m));
    }

    #[test]
    fn two_point_order_two() {
        let nu = distance_matrix_measure(&x1(), 2, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(nu.len(), 2);
        assert_eq!(nu.atoms[&vec![Scalar::int(0)]], Scalar::ratio(1, 2));
        assert_eq!(nu.atoms[&vec![Scalar::int(1)]], Scalar::ratio(1, 2));
    }

    #[test]
    fn single_point_weights() {
        let p = FiniteMmSpace::point(Scalar::int(2));
        let nu = distance_matrix_measure(&p, 3, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(nu.len(), 1);
        assert_eq!(nu.total_weight(Mode::Exact), Scalar::int(8));
    }

    #[test]
    fn guardrail_trips() {
        let err = distance_matrix_measure(&x1(), 30, DEFAULT_ENUM_LIMIT).unwrap_err();
        assert!(matches!(err, MmError::Guardrail { .. }));
        assert!(distance_matrix_measure(&x1(), 1, DEFAULT_ENUM_LIMIT).is_err());
    }

    #[test]
    fn pair_functional_examples() {
        let p = FiniteMmSpace::point(Scalar::int(1));
        assert_eq!(pair_functional(&p, 1.0).unwrap(), 0.0);
        let v = pair_functional(&x1(), 1.0).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp()) / 2.0).abs() < 1e-15);
        let y1 = FiniteMmSpace::from_ratios(&[vec![(0, 1), (2, 1)], vec![(2, 1), (0, 1)]], &[(1, 2), (1, 2)])
            .unwrap();
        let w = pair_functional(&y1, 1.0).unwrap();
        assert!((w - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
        assert!(pair_functional(&x1(), 0.0).is_err());
    }
}
