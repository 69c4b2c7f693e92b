//! Monte Carlo estimators and a permutation test for first-order dominance.
//!
//! Replicates are split into fixed-size blocks, each drawn from its own
//! substream and reduced in block order, so results do not depend on the
//! number of worker threads.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MmError, Result};
use crate::mmcore::monomial::{eval_monomial, EvalMode, Monomial};
use crate::mmcore::space::FiniteMmSpace;
use crate::rng::{substream, SimRng};

const BLOCK: usize = 1024;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sumsq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sumsq += v * v;
    }

    fn merge(self, o: Moments) -> Moments {
        Moments {
            n: self.n + o.n,
            sum: self.sum + o.sum,
            sumsq: self.sumsq + o.sumsq,
        }
    }

    fn estimate(self, seed: u64) -> Estimate {
        let k = self.n as f64;
        let mean = self.sum / k;
        let var = if self.n > 1 {
            ((self.sumsq - k * mean * mean) / (k - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            std_error: (var / k).sqrt(),
            reps: self.n,
            seed,
        }
    }
}

/// Runs `reps` replicates of `draw` in substream blocks and averages them.
fn block_mean<F>(reps: usize, seed: u64, draw: F) -> Result<Estimate>
where
    F: Fn(&mut SimRng, usize) -> Result<f64> + Sync,
{
    if reps == 0 {
        return Err(MmError::Parameter("reps must be positive".into()));
    }
    let blocks = reps.div_ceil(BLOCK);
    let parts: Vec<Result<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b as u64);
            let mut m = Moments::default();
            for i in b * BLOCK..((b + 1) * BLOCK).min(reps) {
                m.push(draw(&mut rng, i)?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        total = total.merge(p?);
    }
    Ok(total.estimate(seed))
}

/// Estimates the Wasserstein-type distance between the stationary genealogies
/// at resampling rates `gamma < gamma_prime`, i.e.
/// `E[1 - e^{-lambda R}] - E[1 - e^{-lambda R'}]` for pair distances
/// `R ~ Exp(gamma)`, `R' ~ Exp(gamma')`, coupled through one standard
/// exponential (`R = E/gamma`, `R' = E/gamma'`). The mean is
/// `gamma'/(gamma'+lambda) - gamma/(gamma+lambda)`.
pub fn estimate_wasserstein_coupled(
    gamma: f64,
    gamma_prime: f64,
    lambda: f64,
    reps: usize,
    seed: u64,
) -> Result<Estimate> {
    if !(gamma > 0.0 && gamma_prime >= gamma && gamma_prime.is_finite()) {
        return Err(MmError::Parameter(format!(
            "need 0 < gamma <= gamma' (got {gamma}, {gamma_prime})"
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(MmError::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    block_mean(reps, seed, |rng, _| {
        let e: f64 = Exp1.sample(rng);
        Ok((-lambda * e / gamma_prime).exp() - (-lambda * e / gamma).exp())
    })
}

/// Averages `<phi, nu^{m,X}>` over `reps` spaces drawn by `simulate`.
///
/// Replicate `i` receives its own substream of `seed`, so two calls with the
/// same seed and coupled simulators see the same underlying randomness.
pub fn estimate_expected_monomial<F>(
    simulate: F,
    phi: &Monomial,
    mode: EvalMode,
    reps: usize,
    seed: u64,
) -> Result<Estimate>
where
    F: Fn(&mut SimRng) -> Result<FiniteMmSpace> + Sync,
{
    if reps == 0 {
        return Err(MmError::Parameter("reps must be positive".into()));
    }
    let values: Vec<Result<f64>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let x = simulate(&mut rng)?;
            Ok(eval_monomial(&x, phi, mode)?.value.to_f64())
        })
        .collect();
    let mut m = Moments::default();
    for v in values {
        m.push(v?);
    }
    Ok(m.estimate(seed))
}

/// Outcome of [`test_first_order_dominance_1d`].
#[derive(Clone, Debug, Serialize)]
pub struct DominanceTest {
    /// `sup_t (F_b(t) - F_a(t))^+`.
    pub statistic: f64,
    /// Permutation quantile at level `1 - alpha`.
    pub threshold: f64,
    pub p_value: f64,
    /// `a` is not rejected as stochastically below `b`.
    pub accepted: bool,
    /// Fraction of indices with `a[i] <= b[i]` for equal-length (paired) inputs.
    pub paired_fraction: Option<f64>,
    pub permutations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct DominanceOptions {
    pub permutations: usize,
    pub seed: u64,
}

impl Default for DominanceOptions {
    fn default() -> Self {
        Self {
            permutations: 1000,
            seed: 0,
        }
    }
}

/// Largest excess of the second sample's CDF over the first's, evaluated on
/// the pooled sorted values. `first[k]` says whether the `k`-th pooled value
/// belongs to the first sample.
fn cdf_excess(sorted: &[f64], first: &[bool], na: usize, nb: usize) -> f64 {
    let (mut ca, mut cb) = (0usize, 0usize);
    let mut best = 0.0f64;
    let mut k = 0;
    while k < sorted.len() {
        let v = sorted[k];
        while k < sorted.len() && sorted[k] == v {
            if first[k] {
                ca += 1;
            } else {
                cb += 1;
            }
            k += 1;
        }
        best = best.max(cb as f64 / nb as f64 - ca as f64 / na as f64);
    }
    best
}

/// One-sided test of "`a` is stochastically below `b`" (`F_b <= F_a`).
///
/// The statistic is the largest violation `sup (F_b - F_a)`; its null
/// distribution is obtained by relabelling the pooled sample.
pub fn test_first_order_dominance_1d(
    a: &[f64],
    b: &[f64],
    alpha: f64,
    opts: DominanceOptions,
) -> Result<DominanceTest> {
    if a.is_empty() || b.is_empty() {
        return Err(MmError::Parameter("samples must be nonempty".into()));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(MmError::Parameter(format!("alpha must be in (0,1), got {alpha}")));
    }
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(MmError::NonFinite(*v));
    }
    let mut pooled: Vec<(f64, bool)> = a.iter().map(|&v| (v, true)).chain(b.iter().map(|&v| (v, false))).collect();
    pooled.sort_by(|p, q| p.0.total_cmp(&q.0));
    let sorted: Vec<f64> = pooled.iter().map(|p| p.0).collect();
    let labels: Vec<bool> = pooled.iter().map(|p| p.1).collect();
    let (na, nb) = (a.len(), b.len());
    let statistic = cdf_excess(&sorted, &labels, na, nb);

    let mut null: Vec<f64> = (0..opts.permutations)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(opts.seed, i as u64);
            let mut l = labels.clone();
            l.shuffle(&mut rng);
            cdf_excess(&sorted, &l, na, nb)
        })
        .collect();
    null.sort_by(f64::total_cmp);
    let threshold = if null.is_empty() {
        0.0
    } else {
        let idx = ((1.0 - alpha) * null.len() as f64).ceil() as usize;
        null[idx.saturating_sub(1).min(null.len() - 1)]
    };
    let exceed = null.iter().filter(|&&s| s >= statistic - 1e-12).count();
    let p_value = (exceed + 1) as f64 / (null.len() + 1) as f64;
    let paired_fraction = (na == nb).then(|| a.iter().zip(b).filter(|(x, y)| x <= y).count() as f64 / na as f64);
    Ok(DominanceTest {
        statistic,
        threshold,
        p_value,
        accepted: p_value > alpha,
        paired_fraction,
        permutations: opts.permutations,
    })
}
