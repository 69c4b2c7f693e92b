//! Normal forms and equivalence of finite mm spaces.
//!
//! Canonicalization restricts to the support, merges zero-distance classes,
//! and then picks the labeling whose flattened distance matrix is
//! lexicographically minimal among all labelings that list points in
//! increasing order of their refined invariant (mass, distance profile).
//! Two spaces are equivalent iff their canonical structures coincide.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::scalar::{Mode, Scalar};
use super::space::FiniteMmSpace;
use crate::error::{MmError, Result};

/// Result of [`canonicalize_with_map`].
#[derive(Clone, Debug)]
pub struct Canonical {
    pub space: FiniteMmSpace,
    /// `map[i]` is the canonical index of input point `i`, `None` if dropped.
    pub map: Vec<Option<usize>>,
}

/// Canonical form of `space`.
pub fn canonicalize(space: &FiniteMmSpace) -> FiniteMmSpace {
    canonicalize_with_map(space).space
}

pub fn canonicalize_with_map(space: &FiniteMmSpace) -> Canonical {
    let (reduced, class_of) = quotient(space);
    let order = canonical_order(&reduced);
    let mut pos = vec![0usize; order.len()];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    let canon = reduced.restrict(&order);
    let map = class_of.into_iter().map(|c| c.map(|c| pos[c])).collect();
    Canonical { space: canon, map }
}

/// Drops zero-mass points and merges zero-distance classes, summing masses.
/// Returns the reduced space and, for every input point, its class index.
fn quotient(space: &FiniteMmSpace) -> (FiniteMmSpace, Vec<Option<usize>>) {
    let n = space.len();
    let mut class_of: Vec<Option<usize>> = vec![None; n];
    let mut reps: Vec<usize> = Vec::new();
    let mut masses: Vec<Scalar> = Vec::new();
    for i in 0..n {
        if !space.mass(i).is_positive() {
            continue;
        }
        match reps.iter().position(|&r| space.dist(r, i).is_zero()) {
            Some(c) => {
                class_of[i] = Some(c);
                masses[c] = &masses[c] + space.mass(i);
            }
            None => {
                class_of[i] = Some(reps.len());
                reps.push(i);
                masses.push(space.mass(i).clone());
            }
        }
    }
    let reduced = space.restrict(&reps).with_masses(masses);
    (reduced, class_of)
}

/// Refined color of every point; equal colors are candidates for swapping.
fn refine(space: &FiniteMmSpace) -> Vec<usize> {
    let n = space.len();
    // initial invariant: mass and sorted distance row
    let initial: Vec<(Scalar, Vec<Scalar>)> = (0..n)
        .map(|i| {
            let mut row: Vec<Scalar> = (0..n).map(|j| space.dist(i, j).clone()).collect();
            row.sort();
            (space.mass(i).clone(), row)
        })
        .collect();
    let mut colors = rank(&initial);
    loop {
        let sigs: Vec<(usize, Vec<(Scalar, usize)>)> = (0..n)
            .map(|i| {
                let mut nb: Vec<(Scalar, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (space.dist(i, j).clone(), colors[j]))
                    .collect();
                nb.sort();
                (colors[i], nb)
            })
            .collect();
        let next = rank(&sigs);
        let before = colors.iter().max().map_or(0, |m| m + 1);
        let after = next.iter().max().map_or(0, |m| m + 1);
        colors = next;
        if after == before {
            return colors;
        }
    }
}

fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    let index: BTreeMap<K, usize> = sorted.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    keys.iter().map(|k| index[k]).collect()
}

/// Points `a`, `b` are twins when swapping them is an automorphism.
fn twin_classes(space: &FiniteMmSpace) -> Vec<usize> {
    let n = space.len();
    let mut class: Vec<usize> = (0..n).collect();
    for a in 0..n {
        if class[a] != a {
            continue;
        }
        for b in (a + 1)..n {
            if class[b] != b || space.mass(a) != space.mass(b) {
                continue;
            }
            let twins = (0..n)
                .filter(|&x| x != a && x != b)
                .all(|x| space.dist(a, x) == space.dist(b, x));
            if twins {
                class[b] = a;
            }
        }
    }
    class
}

struct OrderSearch<'a> {
    space: &'a FiniteMmSpace,
    slot_color: Vec<usize>,
    colors: Vec<usize>,
    twins: Vec<usize>,
    perm: Vec<usize>,
    used: Vec<bool>,
    best: Option<Vec<usize>>,
}

impl OrderSearch<'_> {
    fn row(&self, cand: usize) -> Vec<&Scalar> {
        self.perm.iter().map(|&q| self.space.dist(q, cand)).collect()
    }

    /// Compares the first `len` rows of the current prefix with the best ordering.
    fn cmp_prefix(&self, best: &[usize], len: usize) -> Ordering {
        for q in 1..len {
            for r in 0..q {
                let a = self.space.dist(self.perm[r], self.perm[q]);
                let b = self.space.dist(best[r], best[q]);
                match a.cmp(b) {
                    Ordering::Equal => {}
                    other => return other,
                }
            }
        }
        Ordering::Equal
    }

    fn search(&mut self) {
        let p = self.perm.len();
        let n = self.space.len();
        if p == n {
            let better = match &self.best {
                None => true,
                Some(best) => self.cmp_prefix(best, n) == Ordering::Less,
            };
            if better {
                self.best = Some(self.perm.clone());
            }
            return;
        }
        let want = self.slot_color[p];
        let cands: Vec<usize> = (0..n)
            .filter(|&c| !self.used[c] && self.colors[c] == want)
            .collect();
        // only candidates producing the minimal next row can be optimal
        let rows: Vec<Vec<&Scalar>> = cands.iter().map(|&c| self.row(c)).collect();
        let min_row = rows.iter().min().cloned().unwrap_or_default();
        let mut keep = Vec::new();
        let mut seen_twin = Vec::new();
        for (k, &c) in cands.iter().enumerate() {
            if rows[k] != min_row || seen_twin.contains(&self.twins[c]) {
                continue;
            }
            seen_twin.push(self.twins[c]);
            keep.push(c);
        }
        for c in keep {
            self.perm.push(c);
            self.used[c] = true;
            let prune = match &self.best {
                Some(best) => self.cmp_prefix(best, p + 1) == Ordering::Greater,
                None => false,
            };
            if !prune {
                self.search();
            }
            self.used[c] = false;
            self.perm.pop();
        }
    }
}

/// Canonical ordering of a quotiented space (positive masses, positive distances).
fn canonical_order(space: &FiniteMmSpace) -> Vec<usize> {
    let n = space.len();
    if n <= 1 {
        return (0..n).collect();
    }
    let colors = refine(space);
    let mut slot_color = colors.clone();
    slot_color.sort();
    let mut search = OrderSearch {
        space,
        slot_color,
        colors,
        twins: twin_classes(space),
        perm: Vec::with_capacity(n),
        used: vec![false; n],
        best: None,
    };
    search.search();
    search.best.expect("at least one ordering exists")
}

/// Structural fingerprint of a canonical space: masses then distances,
/// labels excluded. Equal fingerprints mean equivalent spaces.
pub fn structure_key(canonical: &FiniteMmSpace) -> String {
    let n = canonical.len();
    let mut out = format!("{}|{}|", canonical.mode(), n);
    for i in 0..n {
        out.push_str(&canonical.mass(i).to_string());
        out.push(',');
    }
    out.push('|');
    for i in 0..n {
        for j in (i + 1)..n {
            out.push_str(&canonical.dist(i, j).to_string());
            out.push(',');
        }
    }
    out
}

/// Mass- and distance-preserving bijection between supports, as index pairs
/// into the two input spaces (first input index of each merged class).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub pairs: Vec<(usize, usize)>,
}

/// Decides equivalence. Exact spaces compare canonical forms; any float
/// involvement requires `tol` and runs a tolerant bijection search.
pub fn is_equivalent(
    a: &FiniteMmSpace,
    b: &FiniteMmSpace,
    tol: Option<f64>,
) -> Result<(bool, Option<Isomorphism>)> {
    let exact = a.mode() == Mode::Exact && b.mode() == Mode::Exact;
    if !exact && a.mode() != b.mode() && tol.is_none() {
        return Err(MmError::ModeMismatch(a.mode().to_string(), b.mode().to_string()));
    }
    let ca = canonicalize_with_map(a);
    let cb = canonicalize_with_map(b);
    if exact || tol.is_none() {
        if structure_key(&ca.space) != structure_key(&cb.space) {
            return Ok((false, None));
        }
        let k = ca.space.len();
        let pairs = (0..k)
            .map(|c| (first_with(&ca.map, c), first_with(&cb.map, c)))
            .collect();
        return Ok((true, Some(Isomorphism { pairs })));
    }
    let tol = tol.unwrap_or(0.0);
    match tolerant_bijection(&ca.space, &cb.space, tol) {
        Some(sigma) => {
            let pairs = sigma
                .iter()
                .enumerate()
                .map(|(i, &j)| (first_with(&ca.map, i), first_with(&cb.map, j)))
                .collect();
            Ok((true, Some(Isomorphism { pairs })))
        }
        None => Ok((false, None)),
    }
}

fn first_with(map: &[Option<usize>], c: usize) -> usize {
    map.iter()
        .position(|&m| m == Some(c))
        .expect("every class has a member")
}

fn tolerant_bijection(a: &FiniteMmSpace, b: &FiniteMmSpace, tol: f64) -> Option<Vec<usize>> {
    let n = a.len();
    if n != b.len() {
        return None;
    }
    fn go(
        a: &FiniteMmSpace,
        b: &FiniteMmSpace,
        tol: f64,
        sigma: &mut Vec<usize>,
        used: &mut [bool],
    ) -> bool {
        let i = sigma.len();
        if i == a.len() {
            return true;
        }
        for j in 0..b.len() {
            if used[j] || !a.mass(i).eq_tol(b.mass(j), tol) {
                continue;
            }
            let ok = sigma
                .iter()
                .enumerate()
                .all(|(k, &l)| a.dist(k, i).eq_tol(b.dist(l, j), tol));
            if !ok {
                continue;
            }
            sigma.push(j);
            used[j] = true;
            if go(a, b, tol, sigma, used) {
                return true;
            }
            used[j] = false;
            sigma.pop();
        }
        false
    }
    let mut sigma = Vec::with_capacity(n);
    let mut used = vec![false; n];
    go(a, b, tol, &mut sigma, &mut used).then_some(sigma)
}
