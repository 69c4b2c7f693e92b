//! Moran model via its graphical construction.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::{check_rate, index_labels, uniform_space, SimConfig, SimMeta, SimOutput};
use crate::error::{MmError, Result};
use crate::mmcore::canon::canonicalize;
use crate::rng::substream;

/// Runs the Moran model on `N` individuals up to time `t` from `r_0 ≡ 0`.
///
/// Arrows form one Poisson process of rate `gamma N (N-1)` with uniformly
/// chosen ordered pairs; an arrow `i -> j` at time `s` replaces `j` by an
/// offspring of `i`. The genealogical distance at time `t` is
/// `2 (t - s_ij)`, where `s_ij` is the time of the most recent common
/// ancestor, capped at `2t` for lineages from distinct founders.
/// Zero-distance classes are merged in the output.
pub fn simulate_moran(cfg: &SimConfig) -> Result<SimOutput> {
    let n = cfg.n;
    if n == 0 {
        return Err(MmError::Parameter("population size must be at least 1".into()));
    }
    let t = cfg
        .t
        .ok_or_else(|| MmError::Parameter("the Moran model needs a horizon t".into()))?;
    check_rate("t", t, false)?;
    check_rate("gamma", cfg.gamma, false)?;
    let mut rng = substream(cfg.seed, 0);
    // coalescence times, 0 for distinct founders
    let mut c = vec![0.0f64; n * n];
    let rate = cfg.gamma * (n * n.saturating_sub(1)) as f64;
    let mut events = 0u64;
    if rate > 0.0 {
        let clock = Exp::new(rate).map_err(|e| MmError::Parameter(e.to_string()))?;
        let mut s = clock.sample(&mut rng);
        while s < t {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            for k in 0..n {
                if k != j {
                    c[j * n + k] = c[i * n + k];
                    c[k * n + j] = c[i * n + k];
                }
            }
            c[j * n + i] = s;
            c[i * n + j] = s;
            events += 1;
            s += clock.sample(&mut rng);
        }
    }
    let raw: Vec<f64> = (0..n * n)
        .map(|k| if k / n == k % n { 0.0 } else { 2.0 * (t - c[k]) })
        .collect();
    let space = canonicalize(&uniform_space(&raw, n, 1.0 / n as f64, index_labels(n))?);
    Ok(SimOutput {
        spaces: vec![space],
        meta: SimMeta {
            config: cfg.clone(),
            kind: "moran".into(),
            events: vec![events],
            raw: vec![raw],
            extinct: false,
            retries: 0,
            inclusion: None,
        },
    })
}
