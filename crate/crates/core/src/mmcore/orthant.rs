//! Upper-orthant masses `nu^{m,x}(⨉_{i<j} [R_ij, ∞))`.
//!
//! Full enumeration costs `n^m`. When `R` splits into two consecutive blocks
//! with constant thresholds inside each block and across them, the mass is
//! instead a sum over pairs of block supports `(S1, S2)`, where the weight of
//! sequences with support exactly `S` comes from inclusion-exclusion. This
//! keeps blocks of length 12 on small spaces cheap.

use super::dmm::{check_enum_limit, for_each_tuple, pair_count, pair_index, tuple_matrix};
use super::scalar::Scalar;
use super::space::FiniteMmSpace;
use crate::error::{MmError, Result};

/// Largest support size accepted by the counting evaluator.
pub const MAX_COUNTING_POINTS: usize = 14;

/// Two consecutive blocks of sample positions with constant thresholds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPattern {
    pub first: usize,
    pub second: usize,
    pub within_first: Scalar,
    pub within_second: Scalar,
    pub cross: Scalar,
}

impl BlockPattern {
    /// Pattern of the sample `(a,…,a, b,…,b)` with `k` copies of each point.
    pub fn of_sample(x: &FiniteMmSpace, a: usize, b: usize, k: usize) -> Self {
        let zero = Scalar::zero(x.mode());
        Self {
            first: k,
            second: k,
            within_first: zero.clone(),
            within_second: zero,
            cross: x.dist(a, b).clone(),
        }
    }

    pub fn order(&self) -> usize {
        self.first + self.second
    }

    pub fn to_matrix(&self) -> Vec<Scalar> {
        let m = self.order();
        let mut r = Vec::with_capacity(pair_count(m));
        for i in 0..m {
            for j in (i + 1)..m {
                let v = match (i < self.first, j < self.first) {
                    (true, true) => &self.within_first,
                    (false, false) => &self.within_second,
                    _ => &self.cross,
                };
                r.push(v.clone());
            }
        }
        r
    }

    /// Recognizes a two-block structure in an upper-triangular matrix of order `m`.
    pub fn detect(r: &[Scalar], m: usize) -> Option<Self> {
        if m < 2 || r.len() != pair_count(m) {
            return None;
        }
        let at = |i: usize, j: usize| &r[pair_index(m, i, j)];
        (1..m).find_map(|split| {
            let cross = at(0, split).clone();
            let wf = if split >= 2 { at(0, 1).clone() } else { Scalar::zero(cross.mode()) };
            let ws = if m - split >= 2 { at(split, split + 1).clone() } else { Scalar::zero(cross.mode()) };
            for i in 0..m {
                for j in (i + 1)..m {
                    let want = match (i < split, j < split) {
                        (true, true) => &wf,
                        (false, false) => &ws,
                        _ => &cross,
                    };
                    if at(i, j) != want {
                        return None;
                    }
                }
            }
            Some(Self {
                first: split,
                second: m - split,
                within_first: wf,
                within_second: ws,
                cross,
            })
        })
    }
}

/// Orthant mass for an arbitrary threshold matrix of order `m`.
///
/// Two-block patterns use the counting evaluator; anything else is
/// enumerated subject to `limit`.
pub fn eval_upper_orthant(x: &FiniteMmSpace, r: &[Scalar], m: usize, limit: f64) -> Result<Scalar> {
    if r.len() != pair_count(m) {
        return Err(MmError::Parameter(format!(
            "threshold matrix has {} entries, order {m} needs {}",
            r.len(),
            pair_count(m)
        )));
    }
    if let Some(block) = BlockPattern::detect(r, m) {
        if x.support().len() <= MAX_COUNTING_POINTS {
            return orthant_by_counting(x, &block);
        }
    }
    orthant_by_enumeration(x, r, m, limit)
}

/// Orthant mass of the block sample `(a^k, b^k)` of order `2k`.
pub fn eval_block_orthant(x: &FiniteMmSpace, a: usize, b: usize, k: usize) -> Result<Scalar> {
    orthant_by_counting(x, &BlockPattern::of_sample(x, a, b, k))
}

/// Brute-force orthant mass over all `n^m` tuples.
pub fn orthant_by_enumeration(x: &FiniteMmSpace, r: &[Scalar], m: usize, limit: f64) -> Result<Scalar> {
    check_enum_limit(x.support().len(), m, limit)?;
    let mut acc = Scalar::zero(x.mode());
    for_each_tuple(x, m, |pts, w| {
        if tuple_matrix(x, pts).iter().zip(r).all(|(d, t)| d >= t) {
            acc = &acc + w;
        }
    });
    Ok(acc)
}

/// Counting evaluator for two-block patterns.
pub fn orthant_by_counting(x: &FiniteMmSpace, block: &BlockPattern) -> Result<Scalar> {
    let support = x.support();
    let n = support.len();
    if n > MAX_COUNTING_POINTS {
        return Err(MmError::TooLarge {
            n,
            limit: MAX_COUNTING_POINTS,
        });
    }
    let mode = x.mode();
    let w1 = exact_support_weights(x, &support, block.first, &block.within_first);
    let w2 = exact_support_weights(x, &support, block.second, &block.within_second);
    // compatible[i] = points whose distance to i meets the cross threshold
    let compatible: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| x.dist(support[i], support[j]) >= &block.cross)
                .fold(0u32, |acc, j| acc | (1 << j))
        })
        .collect();
    let full = (1u32 << n) - 1;
    let mut total = Scalar::zero(mode);
    for s1 in 1..=full {
        if w1[s1 as usize].is_zero() {
            continue;
        }
        let allowed = (0..n)
            .filter(|&i| s1 & (1 << i) != 0)
            .fold(full, |acc, i| acc & compatible[i]);
        // every nonempty subset of `allowed`
        let mut s2 = allowed;
        while s2 != 0 {
            let w = &w2[s2 as usize];
            if !w.is_zero() {
                total = &total + &(&w1[s1 as usize] * w);
            }
            s2 = (s2 - 1) & allowed;
        }
    }
    Ok(total)
}

/// For each subset `S` of the support, the mass of length-`k` sequences whose
/// set of values is exactly `S` and whose pairwise distances are `>= within`.
fn exact_support_weights(
    x: &FiniteMmSpace,
    support: &[usize],
    k: usize,
    within: &Scalar,
) -> Vec<Scalar> {
    let n = support.len();
    let size = 1usize << n;
    let mode = x.mode();
    let mut out = vec![Scalar::zero(mode); size];
    if k == 0 {
        out[0] = Scalar::one(mode);
        return out;
    }
    let mass_of = |s: usize| -> Scalar {
        (0..n)
            .filter(|&i| s & (1 << i) != 0)
            .fold(Scalar::zero(mode), |acc, i| &acc + x.mass(support[i]))
    };
    if k >= 2 && within.is_positive() {
        // all entries distinct and pairwise far apart
        let mut fact = Scalar::one(mode);
        for f in 2..=k {
            fact = &fact * &Scalar::int(f as i64).to_mode(mode);
        }
        for (s, slot) in out.iter_mut().enumerate() {
            if (s as u32).count_ones() as usize != k {
                continue;
            }
            let pts: Vec<usize> = (0..n).filter(|&i| s & (1 << i) != 0).collect();
            let far = pts.iter().enumerate().all(|(a, &i)| {
                pts[a + 1..]
                    .iter()
                    .all(|&j| x.dist(support[i], support[j]) >= within)
            });
            if far {
                *slot = pts
                    .iter()
                    .fold(fact.clone(), |acc, &i| &acc * x.mass(support[i]));
            }
        }
        return out;
    }
    // surjection weights by inclusion-exclusion: Σ_{T ⊆ S} (-1)^{|S|-|T|} μ(T)^k
    let powers: Vec<Scalar> = (0..size).map(|t| mass_of(t).powi(k as u32)).collect();
    for (s, slot) in out.iter_mut().enumerate().skip(1) {
        let ss = s as u32;
        if ss.count_ones() as usize > k {
            continue;
        }
        let mut acc = Scalar::zero(mode);
        let mut t = ss;
        loop {
            let sign_neg = (ss.count_ones() - t.count_ones()) % 2 == 1;
            acc = if sign_neg {
                &acc - &powers[t as usize]
            } else {
                &acc + &powers[t as usize]
            };
            if t == 0 {
                break;
            }
            t = (t - 1) & ss;
        }
        *slot = acc;
    }
    out
}

/// `2^{k+1} - 2 <= (3/2)^{2k-1}`, the closed-form domination criterion for the
/// two-point versus three-point example at block length `k`.
pub fn two_vs_three_threshold_holds(k: u32) -> bool {
    // multiply through by 2^{2k-1}: (2^{k+1}-2)·2^{2k-1} <= 3^{2k-1}
    use num_bigint::BigInt;
    let two = BigInt::from(2);
    let lhs = (num_traits::pow(two.clone(), (k + 1) as usize) - 2) * num_traits::pow(two, (2 * k - 1) as usize);
    let rhs = num_traits::pow(BigInt::from(3), (2 * k - 1) as usize);
    lhs <= rhs
}
