//! Kingman coalescents at two rates sharing one realization.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use super::{check_rate, index_labels, uniform_space, SimConfig, SimMeta, SimOutput};
use crate::error::{MmError, Result};
use crate::rng::{substream, SimRng};

/// Pairwise standard coalescence times of a Kingman `n`-coalescent in which
/// each pair of blocks merges at rate 1. Returns the flat `n × n` matrix and
/// the number of mergers.
fn standard_kingman(n: usize, rng: &mut SimRng) -> (Vec<f64>, u64) {
    let mut times = vec![0.0f64; n * n];
    let mut blocks: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut clock = 0.0;
    let mut mergers = 0;
    while blocks.len() > 1 {
        let k = blocks.len() as f64;
        let e: f64 = Exp1.sample(rng);
        clock += e / (k * (k - 1.0) / 2.0);
        let a = rng.random_range(0..blocks.len());
        let mut b = rng.random_range(0..blocks.len() - 1);
        if b >= a {
            b += 1;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let merged = blocks.swap_remove(hi);
        for &i in &blocks[lo] {
            for &j in &merged {
                times[i * n + j] = clock;
                times[j * n + i] = clock;
            }
        }
        blocks[lo].extend(merged);
        mergers += 1;
    }
    (times, mergers)
}

/// Genealogies of `N` individuals under resampling rates `gamma` and
/// `gamma + gamma'`, coupled through one standard coalescent: a pair that
/// merges at standard time `S` coalesces at `S/(2 gamma)` in the slow tree and
/// at `S/(2 (gamma + gamma'))` in the fast one (each pair of lineages merges at
/// rate `2 gamma`, as in the Moran model). Distances are `2·min(time, t)`.
///
/// `spaces[0]` is the slow tree, `spaces[1]` the fast one; point `i` of both
/// is individual `i`. `meta.raw` holds the uncapped distances.
pub fn simulate_coupled_coalescent_trees(cfg: &SimConfig) -> Result<SimOutput> {
    check_rate("gamma", cfg.gamma, true)?;
    check_rate("gamma'", cfg.gamma_prime, false)?;
    if cfg.n < 2 {
        return Err(MmError::Parameter("the coalescent needs at least 2 individuals".into()));
    }
    if let Some(t) = cfg.t {
        check_rate("t", t, false)?;
    }
    let n = cfg.n;
    let mut rng = substream(cfg.seed, 0);
    let (standard, mergers) = standard_kingman(n, &mut rng);
    let slow_rate = 2.0 * cfg.gamma;
    let fast_rate = 2.0 * (cfg.gamma + cfg.gamma_prime);
    let mut raw = Vec::with_capacity(2);
    let mut spaces = Vec::with_capacity(2);
    for rate in [slow_rate, fast_rate] {
        let d: Vec<f64> = standard.iter().map(|s| 2.0 * (s / rate)).collect();
        let capped: Vec<f64> = match cfg.t {
            Some(t) => d.iter().map(|v| v.min(2.0 * t)).collect(),
            None => d.clone(),
        };
        spaces.push(uniform_space(&capped, n, 1.0 / n as f64, index_labels(n))?);
        raw.push(d);
    }
    Ok(SimOutput {
        spaces,
        meta: SimMeta {
            config: cfg.clone(),
            kind: "coalescent-time-change".into(),
            events: vec![mergers, mergers],
            raw,
            extinct: false,
            retries: 0,
            inclusion: None,
        },
    })
}

/// How stationary pair distances are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairDistanceSource {
    /// Direct `Exp(gamma)` variates.
    Direct,
    /// Distance between individuals 0 and 1 of an independent `n`-coalescent
    /// per replicate.
    Coalescent { n: usize },
}

/// `reps` samples of the stationary distance between two sampled
/// individuals at resampling rate `gamma`; its law is `Exp(gamma)`.
pub fn sample_stationary_pair_distance(
    gamma: f64,
    reps: usize,
    seed: u64,
    source: PairDistanceSource,
) -> Result<Vec<f64>> {
    check_rate("gamma", gamma, true)?;
    if reps == 0 {
        return Err(MmError::Parameter("reps must be positive".into()));
    }
    match source {
        PairDistanceSource::Direct => {
            let mut rng = substream(seed, 0);
            Ok((0..reps)
                .map(|_| {
                    let e: f64 = Exp1.sample(&mut rng);
                    e / gamma
                })
                .collect())
        }
        PairDistanceSource::Coalescent { n } => {
            if n < 2 {
                return Err(MmError::Parameter("need at least 2 individuals".into()));
            }
            (0..reps)
                .map(|r| {
                    let mut rng = substream(seed, 1 + r as u64);
                    let (standard, _) = standard_kingman(n, &mut rng);
                    // distance 2·S/(2 gamma) between individuals 0 and 1
                    Ok(standard[1] / gamma)
                })
                .collect()
        }
    }
}
