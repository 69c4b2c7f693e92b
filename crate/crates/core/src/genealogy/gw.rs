//! Galton–Watson trees with Poisson offspring, coupled as tree and subtree.

use rand_distr::{Distribution, Poisson};

use super::{check_rate, index_labels, uniform_space, SimConfig, SimMeta, SimOutput};
use crate::error::{MmError, Result};
use crate::mmcore::scalar::Mode;
use crate::mmcore::space::FiniteMmSpace;
use crate::rng::{substream, SimRng};

struct Individual {
    parent: usize,
    /// Also belongs to the `b1` tree.
    small: bool,
}

fn poisson(mean: f64, rng: &mut SimRng) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| MmError::Parameter(format!("Poisson({mean}): {e}")))?;
    Ok(d.sample(rng) as u64)
}

/// Generations `0..=g`; returns `None` once the large tree dies out.
fn grow(cfg: &SimConfig, rng: &mut SimRng) -> Result<(Option<Vec<Vec<Individual>>>, u64)> {
    let scale = cfg.n_gw as f64;
    let base = 1.0 + cfg.b1 / scale;
    let extra = (cfg.b2 - cfg.b1) / scale;
    let mut gens = vec![vec![Individual { parent: 0, small: true }]];
    let mut births = 0;
    for _ in 0..cfg.generations {
        let prev = gens.last().expect("root generation");
        let mut next = Vec::new();
        for (k, ind) in prev.iter().enumerate() {
            // Poisson(1 + b1/N) + Poisson((b2 - b1)/N) ~ Poisson(1 + b2/N);
            // only the first summand's children belong to the b1 tree
            let a = poisson(base, rng)?;
            let b = poisson(extra, rng)?;
            for c in 0..a + b {
                next.push(Individual {
                    parent: k,
                    small: ind.small && c < a,
                });
            }
            births += a + b;
        }
        if next.is_empty() {
            return Ok((None, births));
        }
        gens.push(next);
    }
    Ok((Some(gens), births))
}

/// Generation of the most recent common ancestor of two members of the last generation.
fn mrca_generation(gens: &[Vec<Individual>], mut i: usize, mut j: usize) -> usize {
    let mut g = gens.len() - 1;
    while i != j {
        i = gens[g][i].parent;
        j = gens[g][j].parent;
        g -= 1;
    }
    g
}

/// Grows a Poisson(`1 + b2/N`) Galton–Watson tree for `g` generations in which
/// every individual's children split into a Poisson(`1 + b1/N`) part and an
/// independent Poisson(`(b2 - b1)/N`) part; descendants through the first
/// parts alone form the `b1` tree, a subtree of the `b2` tree.
///
/// Survivors at generation `g` are at distance `2 (g - generation of their
/// MRCA)` and carry mass `1/N`. `spaces[0]` is the `b1` tree, `spaces[1]` the
/// `b2` tree; `meta.inclusion` maps the former into the latter. If the `b2`
/// tree dies out, up to `max_retries` fresh attempts are made before returning
/// two empty spaces with `meta.extinct` set.
pub fn simulate_coupled_gw(cfg: &SimConfig) -> Result<SimOutput> {
    if !(cfg.b1.is_finite() && cfg.b2.is_finite() && cfg.b1 <= cfg.b2) {
        return Err(MmError::Parameter(format!("need b1 <= b2, got {} and {}", cfg.b1, cfg.b2)));
    }
    if cfg.n_gw == 0 || cfg.generations == 0 {
        return Err(MmError::Parameter("need N >= 1 and at least one generation".into()));
    }
    check_rate("1 + b1/N", 1.0 + cfg.b1 / cfg.n_gw as f64, false)?;
    let mut births = Vec::new();
    let mut found = None;
    let mut retries = 0;
    for attempt in 0..=cfg.max_retries {
        let mut rng = substream(cfg.seed, attempt as u64);
        let (gens, b) = grow(cfg, &mut rng)?;
        births.push(b);
        if let Some(gens) = gens {
            found = Some(gens);
            break;
        }
        retries = attempt + 1;
    }
    let w = 1.0 / cfg.n_gw as f64;
    let Some(gens) = found else {
        return Ok(SimOutput {
            spaces: vec![FiniteMmSpace::empty(Mode::Float), FiniteMmSpace::empty(Mode::Float)],
            meta: SimMeta {
                config: cfg.clone(),
                kind: "poisson-thinning".into(),
                events: vec![0, *births.last().unwrap_or(&0)],
                raw: vec![Vec::new(), Vec::new()],
                extinct: true,
                retries: cfg.max_retries,
                inclusion: Some(Vec::new()),
            },
        });
    };
    let last = gens.last().expect("nonempty");
    let g = cfg.generations;
    let n = last.len();
    let mut big = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                big[i * n + j] = 2.0 * (g - mrca_generation(&gens, i, j)) as f64;
            }
        }
    }
    let inclusion: Vec<usize> = (0..n).filter(|&i| last[i].small).collect();
    let k = inclusion.len();
    let mut small = vec![0.0; k * k];
    for (a, &i) in inclusion.iter().enumerate() {
        for (b, &j) in inclusion.iter().enumerate() {
            small[a * k + b] = big[i * n + j];
        }
    }
    let small_space = if k == 0 {
        FiniteMmSpace::empty(Mode::Float)
    } else {
        uniform_space(&small, k, w, inclusion.iter().map(|i| i.to_string()).collect())?
    };
    let big_space = uniform_space(&big, n, w, index_labels(n))?;
    let small_births = gens.iter().skip(1).map(|gen| gen.iter().filter(|i| i.small).count() as u64).sum();
    Ok(SimOutput {
        spaces: vec![small_space, big_space],
        meta: SimMeta {
            config: cfg.clone(),
            kind: "poisson-thinning".into(),
            events: vec![small_births, *births.last().unwrap_or(&0)],
            raw: vec![small, big],
            extinct: false,
            retries,
            inclusion: Some(inclusion),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(b1: f64, b2: f64, seed: u64) -> SimConfig {
        SimConfig {
            seed,
            b1,
            b2,
            generations: 4,
            n_gw: 10,
            ..SimConfig::default()
        }
    }

    #[test]
    fn equal_criticality_gives_equal_trees() {
        for seed in 0..10 {
            let out = simulate_coupled_gw(&cfg(0.5, 0.5, seed)).unwrap();
            assert_eq!(out.meta.raw[0], out.meta.raw[1]);
        }
    }

    #[test]
    fn subtree_distances_are_restrictions() {
        for seed in 0..30 {
            let out = simulate_coupled_gw(&cfg(0.0, 1.0, seed)).unwrap();
            assert!(!out.meta.extinct);
            let inc = out.meta.inclusion.as_ref().unwrap();
            let (s, b) = (&out.spaces[0], &out.spaces[1]);
            assert!(b.is_ultrametric());
            for (a, &i) in inc.iter().enumerate() {
                for (c, &j) in inc.iter().enumerate() {
                    assert_eq!(s.dist(a, c), b.dist(i, j));
                }
            }
            assert!((b.total_mass().to_f64() - b.len() as f64 / 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn extinction_without_retries_is_flagged() {
        // subcritical enough to die quickly
        let mut c = cfg(-9.0, -9.0, 0);
        c.max_retries = 0;
        c.generations = 30;
        let out = simulate_coupled_gw(&c).unwrap();
        assert!(out.meta.extinct);
        assert!(out.spaces.iter().all(|s| s.is_empty()));
    }
}
