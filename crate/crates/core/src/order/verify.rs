//! Independent re-check of order witnesses against the definitions.

use std::collections::{BTreeMap, BTreeSet};

use super::OrderWitness;
use crate::mmcore::scalar::{Mode, Scalar};
use crate::mmcore::space::FiniteMmSpace;

fn zero_for(x: &FiniteMmSpace, y: &FiniteMmSpace) -> Scalar {
    if x.mode() == Mode::Exact && y.mode() == Mode::Exact {
        Scalar::zero(Mode::Exact)
    } else {
        Scalar::zero(Mode::Float)
    }
}

fn positive(s: &FiniteMmSpace) -> BTreeSet<usize> {
    (0..s.len()).filter(|&i| s.mass(i).is_positive()).collect()
}

/// Checks a map given as `(from, to)` pairs: functional, defined on exactly
/// `domain`, landing in `codomain`.
fn as_function(
    pairs: &[(usize, usize)],
    domain: &BTreeSet<usize>,
    codomain: &BTreeSet<usize>,
) -> Result<BTreeMap<usize, usize>, String> {
    let mut f = BTreeMap::new();
    for &(a, b) in pairs {
        if f.insert(a, b).is_some() {
            return Err(format!("point {a} is mapped twice"));
        }
        if !codomain.contains(&b) {
            return Err(format!("image {b} of {a} is outside the target support"));
        }
    }
    let keys: BTreeSet<usize> = f.keys().copied().collect();
    if &keys != domain {
        return Err(format!("map is defined on {keys:?}, expected {domain:?}"));
    }
    Ok(f)
}

/// `d_X(f(a), f(b)) <= d_Y(a, b)` for all pairs of the domain.
fn check_contraction(
    f: &BTreeMap<usize, usize>,
    y: &FiniteMmSpace,
    x: &FiniteMmSpace,
    tol: f64,
) -> Result<(), String> {
    for (&a, &fa) in f {
        for (&b, &fb) in f {
            if !x.dist(fa, fb).le_tol(y.dist(a, b), tol) {
                return Err(format!(
                    "d_X({fa},{fb}) = {} exceeds d_Y({a},{b}) = {}",
                    x.dist(fa, fb),
                    y.dist(a, b)
                ));
            }
        }
    }
    Ok(())
}

fn fibre_masses(
    f: &BTreeMap<usize, usize>,
    weight: impl Fn(usize) -> Scalar,
    zero: &Scalar,
) -> BTreeMap<usize, Scalar> {
    let mut out = BTreeMap::new();
    for (&a, &fa) in f {
        let e = out.entry(fa).or_insert_with(|| zero.clone());
        *e = &*e + &weight(a);
    }
    out
}

/// Returns `Ok(())` iff `w` certifies the claimed relation `x ≤ y`.
pub fn verify_witness(
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    w: &OrderWitness,
    tol: f64,
) -> Result<(), String> {
    let sx = positive(x);
    let sy = positive(y);
    let zero = zero_for(x, y);
    match w {
        OrderWitness::Measure { embedding } => {
            let f = as_function(embedding, &sx, &sy)?;
            let images: BTreeSet<usize> = f.values().copied().collect();
            if images.len() != f.len() {
                return Err("embedding is not injective".into());
            }
            for (&a, &fa) in &f {
                if !x.mass(a).le_tol(y.mass(fa), tol) {
                    return Err(format!("mass of {a} exceeds mass of its image {fa}"));
                }
                for (&b, &fb) in &f {
                    if !x.dist(a, b).eq_tol(y.dist(fa, fb), tol) {
                        return Err(format!("distance between {a} and {b} is not preserved"));
                    }
                }
            }
            Ok(())
        }
        OrderWitness::Metric { tau } => {
            let f = as_function(tau, &sy, &sx)?;
            check_contraction(&f, y, x, tol)?;
            let push = fibre_masses(&f, |a| y.mass(a).clone(), &zero);
            for &p in &sx {
                let got = push.get(&p).cloned().unwrap_or_else(|| zero.clone());
                if !got.eq_tol(x.mass(p), tol) {
                    return Err(format!("pushforward puts {got} on {p}, expected {}", x.mass(p)));
                }
            }
            Ok(())
        }
        OrderWitness::Gen { used, g, submass } => {
            let used_set: BTreeSet<usize> = used.iter().copied().collect();
            if used_set.len() != used.len() || !used_set.is_subset(&sy) {
                return Err("used points must be distinct points of the support".into());
            }
            let f = as_function(g, &used_set, &sx)?;
            check_contraction(&f, y, x, tol)?;
            let mut sub = BTreeMap::new();
            for (p, m) in submass {
                if !used_set.contains(p) {
                    return Err(format!("sub-mass on unused point {p}"));
                }
                if m.is_negative() || !m.le_tol(y.mass(*p), tol) {
                    return Err(format!("sub-mass {m} at {p} is not within [0, mass]"));
                }
                if sub.insert(*p, m.clone()).is_some() {
                    return Err(format!("sub-mass given twice at {p}"));
                }
            }
            let push = fibre_masses(&f, |a| sub.get(&a).cloned().unwrap_or_else(|| zero.clone()), &zero);
            for &p in &sx {
                let got = push.get(&p).cloned().unwrap_or_else(|| zero.clone());
                if !got.eq_tol(x.mass(p), tol) {
                    return Err(format!("sub-measure pushes {got} onto {p}, expected {}", x.mass(p)));
                }
            }
            Ok(())
        }
        OrderWitness::Global { tau } => {
            let f = as_function(tau, &sy, &sx)?;
            check_contraction(&f, y, x, tol)?;
            let push = fibre_masses(&f, |a| y.mass(a).clone(), &zero);
            for &p in &sx {
                let got = push.get(&p).cloned().unwrap_or_else(|| zero.clone());
                if !x.mass(p).le_tol(&got, tol) {
                    return Err(format!("preimage of {p} carries {got} < {}", x.mass(p)));
                }
            }
            Ok(())
        }
    }
}
