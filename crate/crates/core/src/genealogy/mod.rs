//! Seeded simulators producing (coupled) finite genealogy spaces.
//!
//! Every simulator draws from `substream(cfg.seed, _)`, so a configuration
//! determines its output bit for bit.

mod coalescent;
mod graph;
mod gw;
mod moran;

use serde::Serialize;

use crate::error::{MmError, Result};
use crate::mmcore::space::FiniteMmSpace;

pub use coalescent::{sample_stationary_pair_distance, simulate_coupled_coalescent_trees, PairDistanceSource};
pub use graph::simulate_er_family;
pub use gw::simulate_coupled_gw;
pub use moran::simulate_moran;

/// Parameters shared by all simulators; each reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Population size (Moran, coalescent) or number of vertices (ER).
    pub n: usize,
    /// Resampling rate.
    pub gamma: f64,
    /// Extra resampling rate of the faster coalescent.
    pub gamma_prime: f64,
    /// Time horizon; distances are capped at `2t`. Required by Moran.
    pub t: Option<f64>,
    /// Edge probabilities of the ER family.
    pub p: Vec<f64>,
    /// Offspring criticalities `b1 <= b2`.
    pub b1: f64,
    pub b2: f64,
    pub generations: usize,
    /// Branching scale: offspring means are `1 + b/n_gw`, masses `1/n_gw`.
    pub n_gw: usize,
    /// Extra attempts after extinction of the larger GW tree.
    pub max_retries: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 5,
            gamma: 1.0,
            gamma_prime: 1.0,
            t: None,
            p: Vec::new(),
            b1: 0.0,
            b2: 1.0,
            generations: 4,
            n_gw: 10,
            max_retries: 100,
        }
    }
}

/// Simulator output: spaces in float mode plus metadata.
#[derive(Clone, Debug, Serialize)]
pub struct SimOutput {
    #[serde(skip)]
    pub spaces: Vec<FiniteMmSpace>,
    pub meta: SimMeta,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimMeta {
    pub config: SimConfig,
    /// Which coupling produced the spaces.
    pub kind: String,
    /// Realized events (arrows, mergers, offspring, edges), one count per space.
    pub events: Vec<u64>,
    /// Uncapped distances before any quotient, row-major, one matrix per
    /// space; point `i` of the raw matrix is individual `i` of the simulation.
    #[serde(skip)]
    pub raw: Vec<Vec<f64>>,
    /// GW: extinction of the larger tree after all retries.
    pub extinct: bool,
    pub retries: usize,
    /// GW: index in the second space of each point of the first.
    pub inclusion: Option<Vec<usize>>,
}

fn check_rate(name: &str, v: f64, strict: bool) -> Result<()> {
    let ok = v.is_finite() && if strict { v > 0.0 } else { v >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(MmError::Parameter(format!(
            "{name} must be {} and finite, got {v}",
            if strict { "positive" } else { "nonnegative" }
        )))
    }
}

/// Float space with uniform masses `w` from a flat distance matrix.
fn uniform_space(flat: &[f64], n: usize, w: f64, labels: Vec<String>) -> Result<FiniteMmSpace> {
    let rows: Vec<Vec<f64>> = flat.chunks(n.max(1)).take(n).map(|r| r.to_vec()).collect();
    FiniteMmSpace::from_f64(&rows, &vec![w; n])?.with_labels(labels)
}

fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}
