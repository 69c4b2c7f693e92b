//! Decision procedures for the orders on finite mm spaces.
//!
//! * [`le_measure`]: the smaller space embeds isometrically with pointwise
//!   smaller masses.
//! * [`le_metric`]: equal total mass, transported onto the smaller space by a
//!   measure-preserving 1-Lipschitz map.
//! * [`le_gen`]: a sub-measure of the larger space is transported that way.
//! * [`le_global_map`]: one 1-Lipschitz map on the whole larger support whose
//!   pushforward dominates the smaller measure. Strictly stronger than `le_gen`.
//!
//! Every positive verdict carries a witness that [`verify_witness`] re-checks
//! against the definitions without sharing code with the search.

mod search;
mod verify;

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{MmError, Result};
use crate::mmcore::dmm::distance_matrix_measure;
use crate::mmcore::scalar::{Mode, Scalar};
use crate::mmcore::space::FiniteMmSpace;
use crate::stats::strassen::{strassen_check, AtomOrder, DiscreteLaw, DominanceResult};

pub use verify::verify_witness;

/// Default absolute tolerance for float comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default bound on the support size handled by the backtracking checkers.
pub const DEFAULT_MAX_POINTS: usize = 12;

/// Certificate for a positive order decision. Indices refer to the input spaces.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum OrderWitness {
    /// `(x, y)` pairs of an isometric injection `supp(mu_X) -> supp(mu_Y)`.
    Measure { embedding: Vec<(usize, usize)> },
    /// `(y, x)` pairs of a measure-preserving sub-isometry `supp(mu_Y) -> supp(mu_X)`.
    Metric { tau: Vec<(usize, usize)> },
    /// Sub-isometry `g` on `used ⊆ supp(mu_Y)` with sub-masses `submass`.
    Gen {
        used: Vec<usize>,
        g: Vec<(usize, usize)>,
        #[serde(serialize_with = "ser_submass")]
        submass: Vec<(usize, Scalar)>,
    },
    /// `(y, x)` pairs of a sub-measure-preserving sub-isometry on all of `supp(mu_Y)`.
    Global { tau: Vec<(usize, usize)> },
}

fn ser_submass<S: serde::Serializer>(v: &[(usize, Scalar)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (y, m) in v {
        seq.serialize_element(&(y, m.to_string()))?;
    }
    seq.end()
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    #[serde(serialize_with = "ser_duration")]
    pub elapsed: Duration,
}

fn ser_duration<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderDecision {
    pub verdict: bool,
    pub witness: Option<OrderWitness>,
    pub stats: SearchStats,
}

/// Options shared by the checkers.
#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    /// Absolute tolerance. Required when exactly one side is a float space;
    /// float-only comparisons default to [`DEFAULT_TOL`]; ignored for exact pairs.
    pub tol: Option<f64>,
    pub max_points: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_points: DEFAULT_MAX_POINTS,
        }
    }
}

impl CheckOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol: Some(tol),
            ..Self::default()
        }
    }
}

/// Which relation to decide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Measure,
    Metric,
    Gen,
    Global,
}

impl std::str::FromStr for OrderKind {
    type Err = MmError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measure" => Ok(OrderKind::Measure),
            "metric" => Ok(OrderKind::Metric),
            "gen" => Ok(OrderKind::Gen),
            "global" => Ok(OrderKind::Global),
            other => Err(MmError::Parameter(format!("unknown order {other:?}"))),
        }
    }
}

/// Resolves the effective tolerance for a pair of spaces.
pub(crate) fn effective_tol(x: &FiniteMmSpace, y: &FiniteMmSpace, tol: Option<f64>) -> Result<f64> {
    match (x.mode(), y.mode(), tol) {
        (Mode::Exact, Mode::Exact, _) => Ok(0.0),
        (Mode::Float, Mode::Float, t) => Ok(t.unwrap_or(DEFAULT_TOL)),
        (_, _, Some(t)) => Ok(t),
        (a, b, None) => Err(MmError::ModeMismatch(a.to_string(), b.to_string())),
    }
}

fn guard(x: &FiniteMmSpace, y: &FiniteMmSpace, opts: &CheckOptions) -> Result<()> {
    for s in [x, y] {
        let n = s.support().len();
        if n > opts.max_points {
            return Err(MmError::TooLarge {
                n,
                limit: opts.max_points,
            });
        }
    }
    Ok(())
}

fn decide(
    kind: OrderKind,
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    opts: CheckOptions,
) -> Result<OrderDecision> {
    let tol = effective_tol(x, y, opts.tol)?;
    guard(x, y, &opts)?;
    let start = Instant::now();
    let mut problem = search::Problem::new(x, y, tol);
    let witness = match kind {
        OrderKind::Measure => problem.measure(),
        OrderKind::Metric => {
            let (mx, my) = (x.total_mass(), y.total_mass());
            if !mx.eq_tol(&my, tol) {
                return Err(MmError::UnequalMass(mx.to_string(), my.to_string()));
            }
            problem.metric()
        }
        OrderKind::Gen => problem.gen(),
        OrderKind::Global => problem.global(),
    };
    let stats = SearchStats {
        nodes: problem.nodes,
        elapsed: start.elapsed(),
    };
    if let Some(w) = &witness {
        debug_assert!(
            verify_witness(x, y, w, tol).is_ok(),
            "search produced a witness the verifier rejects: {:?}",
            verify_witness(x, y, w, tol)
        );
    }
    Ok(OrderDecision {
        verdict: witness.is_some(),
        witness,
        stats,
    })
}

/// Decides `x ≤measure y`.
pub fn le_measure(x: &FiniteMmSpace, y: &FiniteMmSpace, opts: CheckOptions) -> Result<OrderDecision> {
    decide(OrderKind::Measure, x, y, opts)
}

/// Decides `x ≤metric y`. Unequal total masses are an error, not a `false`.
pub fn le_metric(x: &FiniteMmSpace, y: &FiniteMmSpace, opts: CheckOptions) -> Result<OrderDecision> {
    decide(OrderKind::Metric, x, y, opts)
}

/// Decides `x ≤gen y`.
pub fn le_gen(x: &FiniteMmSpace, y: &FiniteMmSpace, opts: CheckOptions) -> Result<OrderDecision> {
    decide(OrderKind::Gen, x, y, opts)
}

/// Decides the single-map relation `x ≤' y`.
pub fn le_global_map(x: &FiniteMmSpace, y: &FiniteMmSpace, opts: CheckOptions) -> Result<OrderDecision> {
    decide(OrderKind::Global, x, y, opts)
}

pub fn compare(
    kind: OrderKind,
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    opts: CheckOptions,
) -> Result<OrderDecision> {
    decide(kind, x, y, opts)
}

/// Whether `nu^{m,x}(A) <= nu^{m,y}(A)` for every increasing set `A`,
/// decided through a monotone coupling of the two distance matrix measures.
pub fn check_nu_dominance(
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    m: usize,
    limit: f64,
    tol: Option<f64>,
) -> Result<DominanceResult> {
    let tol = effective_tol(x, y, tol)?;
    let (mx, my) = (x.total_mass(), y.total_mass());
    if !mx.eq_tol(&my, tol) {
        return Err(MmError::UnequalMass(mx.to_string(), my.to_string()));
    }
    let to_law = |s: &FiniteMmSpace| -> Result<DiscreteLaw> {
        let nu = distance_matrix_measure(s, m, limit)?;
        DiscreteLaw::new(nu.atoms.into_iter().collect())
    };
    strassen_check(&to_law(x)?, &to_law(y)?, AtomOrder::Componentwise, tol)
}
