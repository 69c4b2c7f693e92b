//! Stochastic dominance of finite laws via monotone couplings.

use serde::Serialize;

use super::flow::FlowNetwork;
use crate::error::{MmError, Result};
use crate::mmcore::scalar::{sum_in, Mode, Scalar};

/// Partial order on atom values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomOrder {
    /// Single real coordinates.
    Real,
    /// Componentwise order on vectors (upper-triangular distance matrices).
    Componentwise,
}

impl AtomOrder {
    pub fn le(&self, a: &[Scalar], b: &[Scalar]) -> bool {
        match self {
            AtomOrder::Real => a[0] <= b[0],
            AtomOrder::Componentwise => a.len() == b.len() && a.iter().zip(b).all(|(u, v)| u <= v),
        }
    }
}

/// Finitely supported nonnegative measure.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLaw {
    pub atoms: Vec<(Vec<Scalar>, Scalar)>,
}

impl DiscreteLaw {
    pub fn new(atoms: Vec<(Vec<Scalar>, Scalar)>) -> Result<Self> {
        if let Some((_, w)) = atoms.iter().find(|(_, w)| w.is_negative()) {
            return Err(MmError::Parameter(format!("negative atom weight {w}")));
        }
        Ok(Self { atoms })
    }

    /// Real-valued atoms.
    pub fn real(atoms: Vec<(Scalar, Scalar)>) -> Result<Self> {
        Self::new(atoms.into_iter().map(|(v, w)| (vec![v], w)).collect())
    }

    pub fn mode(&self) -> Mode {
        self.atoms.first().map_or(Mode::Exact, |(_, w)| w.mode())
    }

    pub fn total(&self) -> Scalar {
        sum_in(self.mode(), self.atoms.iter().map(|(_, w)| w.clone()))
    }
}

/// Outcome of [`strassen_check`]. `coupling` lists `(i, j, mass)` with
/// atom `i` of the first law below atom `j` of the second.
#[derive(Clone, Debug, Serialize)]
pub struct DominanceResult {
    pub dominated: bool,
    #[serde(skip)]
    pub coupling: Option<Vec<(usize, usize, Scalar)>>,
    pub flow: f64,
    pub total: f64,
}

/// Decides whether `mu` is stochastically below `nu`: a coupling supported on
/// `{(a, b) : a <= b}` exists iff the bipartite admissibility network carries
/// the full mass.
pub fn strassen_check(
    mu: &DiscreteLaw,
    nu: &DiscreteLaw,
    order: AtomOrder,
    tol: f64,
) -> Result<DominanceResult> {
    let (tm, tn) = (mu.total(), nu.total());
    let mode = if mu.mode() == Mode::Exact && nu.mode() == Mode::Exact {
        Mode::Exact
    } else {
        Mode::Float
    };
    if !tm.eq_tol(&tn, tol) {
        return Err(MmError::UnequalMass(tm.to_string(), tn.to_string()));
    }
    let (a, b) = (mu.atoms.len(), nu.atoms.len());
    let source = a + b;
    let sink = source + 1;
    let eps = if mode == Mode::Float { 1e-15 * tm.to_f64().max(1.0) } else { 0.0 };
    let mut net = FlowNetwork::new(a + b + 2, mode, eps);
    let big = (&tm + &Scalar::one(mode)).to_mode(mode);
    for (i, (_, w)) in mu.atoms.iter().enumerate() {
        net.add_edge(source, i, w.clone());
    }
    for (j, (_, w)) in nu.atoms.iter().enumerate() {
        net.add_edge(a + j, sink, w.clone());
    }
    let mut mids = Vec::new();
    for (i, (va, _)) in mu.atoms.iter().enumerate() {
        for (j, (vb, _)) in nu.atoms.iter().enumerate() {
            if order.le(va, vb) {
                mids.push((i, j, net.add_edge(i, a + j, big.clone())));
            }
        }
    }
    let flow = net.max_flow(source, sink);
    let dominated = flow.eq_tol(&tm.to_mode(mode), tol);
    let coupling = dominated.then(|| {
        mids.iter()
            .filter_map(|&(i, j, id)| {
                let f = net.flow(id);
                f.is_positive().then_some((i, j, f))
            })
            .collect()
    });
    Ok(DominanceResult {
        dominated,
        coupling,
        flow: flow.to_f64(),
        total: tm.to_f64(),
    })
}
