//! Eurandom distance and its generalization to unequal masses.
//!
//! Both objectives are quadratic in the coupling and are minimized by
//! Frank–Wolfe (linear oracle = transport simplex, exact line search) from
//! several deterministic and random starts. The result always carries a
//! lower bound; it is `certified` when the best value found meets it.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::lp::{permuted_vertex, solve_transport_lp, Plan};
use crate::error::{MmError, Result};
use crate::mmcore::canon::structure_key;
use crate::mmcore::dmm::pair_functional;
use crate::mmcore::space::FiniteMmSpace;
use crate::rng::substream;

#[derive(Clone, Copy, Debug)]
pub struct EurandomConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop a descent when the relative decrease falls below this.
    pub rel_tol: f64,
    /// Certified when `upper - lower <= cert_tol`.
    pub cert_tol: f64,
    /// Accepted gap between the total masses in [`eurandom`].
    pub mass_tol: f64,
}

impl Default for EurandomConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            max_iter: 10_000,
            rel_tol: 1e-12,
            cert_tol: 1e-6,
            mass_tol: 1e-9,
        }
    }
}

/// Coupling between the supports of two spaces; `x_index[i]`/`y_index[j]`
/// give the original point indices of row `i` / column `j`.
#[derive(Clone, Debug, Serialize)]
pub struct Coupling {
    pub x_index: Vec<usize>,
    pub y_index: Vec<usize>,
    pub plan: Plan,
}

impl Coupling {
    /// Entry for original point indices.
    pub fn mass(&self, x: usize, y: usize) -> f64 {
        match (
            self.x_index.iter().position(|&i| i == x),
            self.y_index.iter().position(|&j| j == y),
        ) {
            (Some(i), Some(j)) => self.plan.get(i, j),
            _ => 0.0,
        }
    }

    fn transposed(&self) -> Coupling {
        let (n, m) = (self.plan.rows, self.plan.cols);
        let mut plan = Plan::zeros(m, n);
        for i in 0..n {
            for j in 0..m {
                plan.pi[j * n + i] = self.plan.get(i, j);
            }
        }
        Coupling {
            x_index: self.y_index.clone(),
            y_index: self.x_index.clone(),
            plan,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EurandomResult {
    pub lambda: f64,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub coupling: Coupling,
    pub certified: bool,
    pub restarts: usize,
    /// Restart that produced the reported coupling.
    pub best_restart: usize,
}

impl EurandomResult {
    pub fn value(&self) -> f64 {
        self.upper_bound
    }
}

/// Support data of one side.
struct Side {
    index: Vec<usize>,
    mass: Vec<f64>,
    /// `e^{-lambda r}` on support pairs, row-major.
    ker: Vec<f64>,
    /// `1 - e^{-lambda r}`.
    pair: Vec<f64>,
}

impl Side {
    fn new(s: &FiniteMmSpace, lambda: f64) -> Self {
        let index = s.support();
        let n = index.len();
        let mass = index.iter().map(|&i| s.mass(i).to_f64()).collect();
        let mut ker = vec![0.0; n * n];
        for (a, &i) in index.iter().enumerate() {
            for (b, &k) in index.iter().enumerate() {
                ker[a * n + b] = (-lambda * s.dist(i, k).to_f64()).exp();
            }
        }
        let pair = ker.iter().map(|e| 1.0 - e).collect();
        Self { index, mass, ker, pair }
    }

    fn len(&self) -> usize {
        self.index.len()
    }

    /// `sum_{a,b} (1 - e^{-lambda r_ab}) w_a w_b`.
    fn pf(&self, w: &[f64]) -> f64 {
        let n = self.len();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += self.pair[a * n + b] * w[a] * w[b];
            }
        }
        s
    }

    /// `2 sum_b (1 - e^{-lambda r_ab}) w_b`, the gradient of `pf`.
    fn pf_grad(&self, w: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|a| 2.0 * (0..n).map(|b| self.pair[a * n + b] * w[b]).sum::<f64>())
            .collect()
    }
}

/// The quadratic objective on `n × m` plans.
struct Objective<'a> {
    x: &'a Side,
    y: &'a Side,
    /// Include the mass-defect terms of the generalized distance.
    generalized: bool,
    /// `pf(x) + pf(y)` (generalized only).
    offset: f64,
}

fn row_sums(p: &[f64], n: usize, m: usize) -> Vec<f64> {
    (0..n).map(|i| p[i * m..(i + 1) * m].iter().sum()).collect()
}

fn col_sums(p: &[f64], n: usize, m: usize) -> Vec<f64> {
    (0..m).map(|j| (0..n).map(|i| p[i * m + j]).sum()).collect()
}

impl Objective<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    /// `sum |e^{-lambda r_Y(j,l)} - e^{-lambda r_X(i,k)}| p_ij q_kl`.
    fn kernel_form(&self, p: &[f64], q: &[f64]) -> f64 {
        let (n, m) = self.dims();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..m {
                let pij = p[i * m + j];
                if pij == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for k in 0..n {
                    let ex = self.x.ker[i * n + k];
                    for l in 0..m {
                        let qkl = q[k * m + l];
                        if qkl != 0.0 {
                            inner += (self.y.ker[j * m + l] - ex).abs() * qkl;
                        }
                    }
                }
                s += pij * inner;
            }
        }
        s
    }

    fn kernel_grad(&self, p: &[f64]) -> Vec<f64> {
        let (n, m) = self.dims();
        let mut g = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                let mut inner = 0.0;
                for k in 0..n {
                    let ex = self.x.ker[i * n + k];
                    for l in 0..m {
                        let pkl = p[k * m + l];
                        if pkl != 0.0 {
                            inner += (self.y.ker[j * m + l] - ex).abs() * pkl;
                        }
                    }
                }
                g[i * m + j] = 2.0 * inner;
            }
        }
        g
    }

    /// Quadratic part evaluated on a direction (no offset, no linear terms).
    fn quad(&self, d: &[f64]) -> f64 {
        let mut v = self.kernel_form(d, d);
        if self.generalized {
            let (n, m) = self.dims();
            v -= self.x.pf(&row_sums(d, n, m));
            v -= self.y.pf(&col_sums(d, n, m));
        }
        v
    }

    fn value(&self, p: &[f64]) -> f64 {
        if self.generalized {
            self.offset + self.quad(p)
        } else {
            self.kernel_form(p, p)
        }
    }

    fn grad(&self, p: &[f64]) -> Vec<f64> {
        let mut g = self.kernel_grad(p);
        if self.generalized {
            let (n, m) = self.dims();
            let gr = self.x.pf_grad(&row_sums(p, n, m));
            let gc = self.y.pf_grad(&col_sums(p, n, m));
            for i in 0..n {
                for j in 0..m {
                    g[i * m + j] -= gr[i] + gc[j];
                }
            }
        }
        g
    }

    /// Minimizer of the linear functional `grad` over the feasible set.
    fn linear_oracle(&self, grad: &[f64]) -> Result<Vec<f64>> {
        let (n, m) = self.dims();
        if !self.generalized {
            return Ok(solve_transport_lp(grad, &self.x.mass, &self.y.mass)?.plan.pi);
        }
        // {p >= 0, rows <= mu_X, cols <= mu_Y} as a balanced problem with a
        // slack row and slack column
        let (mx, my): (f64, f64) = (self.x.mass.iter().sum(), self.y.mass.iter().sum());
        let mut rows = self.x.mass.clone();
        rows.push(my);
        let mut cols = self.y.mass.clone();
        cols.push(mx);
        let mut cost = vec![0.0; (n + 1) * (m + 1)];
        for i in 0..n {
            for j in 0..m {
                cost[i * (m + 1) + j] = grad[i * m + j];
            }
        }
        let big = solve_transport_lp(&cost, &rows, &cols)?.plan;
        let mut s = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                s[i * m + j] = big.get(i, j);
            }
        }
        Ok(s)
    }

    /// Frank–Wolfe from `start`; returns the final plan and value.
    fn descend(&self, start: Vec<f64>, cfg: &EurandomConfig) -> Result<(Vec<f64>, f64)> {
        let mut p = start;
        let mut f = self.value(&p);
        for _ in 0..cfg.max_iter {
            let g = self.grad(&p);
            let s = self.linear_oracle(&g)?;
            let d: Vec<f64> = s.iter().zip(&p).map(|(a, b)| a - b).collect();
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            if slope >= -1e-15 * f.abs().max(1e-300) {
                break;
            }
            // f(p + t d) = f + slope t + a t^2 on [0, 1]
            let a = self.quad(&d);
            let t = if a > 0.0 {
                (-slope / (2.0 * a)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let next: Vec<f64> = p.iter().zip(&d).map(|(pi, di)| (pi + t * di).max(0.0)).collect();
            let fnext = self.value(&next);
            if fnext > f {
                break;
            }
            let decrease = f - fnext;
            p = next;
            f = fnext;
            if decrease <= cfg.rel_tol * f.abs().max(1e-300) {
                break;
            }
        }
        Ok((p, f))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(MmError::Parameter(format!("lambda must be positive, got {lambda}")))
    }
}

/// Starting plans: restart 0 is the product coupling, 1 the northwest corner,
/// the rest northwest corners under random row/column orders.
fn start_plan(x: &Side, y: &Side, r: usize, seed: u64, generalized: bool) -> Vec<f64> {
    let (n, m) = (x.len(), y.len());
    let (mx, my): (f64, f64) = (x.mass.iter().sum(), y.mass.iter().sum());
    if r == 0 {
        let scale = if generalized { mx.max(my) } else { mx };
        let mut p = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                p[i * m + j] = x.mass[i] * y.mass[j] / scale;
            }
        }
        return p;
    }
    let mut rp: Vec<usize> = (0..n).collect();
    let mut cp: Vec<usize> = (0..m).collect();
    if r > 1 {
        let mut rng = substream(seed, r as u64);
        rp.shuffle(&mut rng);
        cp.shuffle(&mut rng);
    }
    if !generalized {
        return permuted_vertex(&x.mass, &y.mass, &rp, &cp).pi;
    }
    // vertex of the sub-coupling polytope: pairs up min(mx, my) of mass
    let t = mx.min(my);
    let cap = |w: &[f64], order: &[usize]| {
        let mut left = t;
        let mut out = vec![0.0; w.len()];
        for &i in order {
            out[i] = w[i].min(left);
            left -= out[i];
        }
        out
    };
    let (a, b) = (cap(&x.mass, &rp), cap(&y.mass, &cp));
    permuted_vertex(&a, &b, &rp, &cp).pi
}

fn optimize(
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    lambda: f64,
    cfg: &EurandomConfig,
    generalized: bool,
) -> Result<EurandomResult> {
    let (sx, sy) = (Side::new(x, lambda), Side::new(y, lambda));
    let (pfx, pfy) = (sx.pf(&sx.mass), sy.pf(&sy.mass));
    let lower = (pfy - pfx).abs();
    let obj = Objective {
        x: &sx,
        y: &sy,
        generalized,
        offset: pfx + pfy,
    };
    let (n, m) = (sx.len(), sy.len());
    let empty = |value: f64| EurandomResult {
        lambda,
        upper_bound: value,
        lower_bound: lower,
        coupling: Coupling {
            x_index: sx.index.clone(),
            y_index: sy.index.clone(),
            plan: Plan::zeros(n, m),
        },
        certified: (value - lower).abs() <= cfg.cert_tol,
        restarts: 0,
        best_restart: 0,
    };
    if n == 0 || m == 0 {
        return Ok(empty(if generalized { pfx + pfy } else { 0.0 }));
    }
    let restarts = cfg.restarts.max(1);
    let runs: Vec<Result<(Vec<f64>, f64)>> = (0..restarts)
        .into_par_iter()
        .map(|r| obj.descend(start_plan(&sx, &sy, r, cfg.seed, generalized), cfg))
        .collect();
    let mut best: Option<(usize, Vec<f64>, f64)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let (p, f) = run?;
        if best.as_ref().is_none_or(|b| f < b.2) {
            best = Some((r, p, f));
        }
    }
    let (best_restart, pi, value) = best.expect("at least one restart");
    // the lower bound is exact; a slightly smaller float value is rounding
    let upper = value.max(lower);
    Ok(EurandomResult {
        lambda,
        upper_bound: upper,
        lower_bound: lower,
        coupling: Coupling {
            x_index: sx.index,
            y_index: sy.index,
            plan: Plan { rows: n, cols: m, pi },
        },
        certified: upper - lower <= cfg.cert_tol,
        restarts,
        best_restart,
    })
}

/// Runs `optimize` in a canonical orientation so that swapping the arguments
/// yields the same value and the transposed coupling.
fn oriented(
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    lambda: f64,
    cfg: &EurandomConfig,
    generalized: bool,
) -> Result<EurandomResult> {
    if structure_key(x) <= structure_key(y) {
        optimize(x, y, lambda, cfg, generalized)
    } else {
        let mut r = optimize(y, x, lambda, cfg, generalized)?;
        r.coupling = r.coupling.transposed();
        Ok(r)
    }
}

/// `d_Eur^lambda(x, y)`: the minimum over couplings `pi` of
/// `sum |e^{-lambda r_Y(j,l)} - e^{-lambda r_X(i,k)}| pi_ij pi_kl`.
pub fn eurandom(x: &FiniteMmSpace, y: &FiniteMmSpace, lambda: f64, cfg: &EurandomConfig) -> Result<EurandomResult> {
    check_lambda(lambda)?;
    let (mx, my) = (x.total_mass().to_f64(), y.total_mass().to_f64());
    if (mx - my).abs() > cfg.mass_tol * mx.max(my).max(1.0) {
        return Err(MmError::UnequalMass(mx.to_string(), my.to_string()));
    }
    oriented(x, y, lambda, cfg, false)
}

/// Generalized distance: minimum over sub-couplings `pi` (rows `<= mu_X`,
/// columns `<= mu_Y`) of the Eurandom objective plus the mass-defect penalty
/// `pf(x) - pf(x') + pf(y) - pf(y')`, with `x'`, `y'` the marginals of `pi` and
/// `pf(z) = ∫(1 - e^{-lambda r}) dnu^{2,z}`.
pub fn gen_eurandom(
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    lambda: f64,
    cfg: &EurandomConfig,
) -> Result<EurandomResult> {
    check_lambda(lambda)?;
    oriented(x, y, lambda, cfg, true)
}

/// Objective value of a given coupling (no optimization).
pub fn eurandom_objective(x: &FiniteMmSpace, y: &FiniteMmSpace, lambda: f64, coupling: &Coupling) -> Result<f64> {
    check_lambda(lambda)?;
    let (sx, sy) = (Side::new(x, lambda), Side::new(y, lambda));
    if sx.index != coupling.x_index || sy.index != coupling.y_index {
        return Err(MmError::Structure("coupling does not match the supports".into()));
    }
    let obj = Objective {
        x: &sx,
        y: &sy,
        generalized: false,
        offset: 0.0,
    };
    Ok(obj.value(&coupling.plan.pi))
}

/// `|pf(y) - pf(x)|`, the lower bound shared by both distances.
pub fn pair_functional_gap(x: &FiniteMmSpace, y: &FiniteMmSpace, lambda: f64) -> Result<f64> {
    Ok((pair_functional(y, lambda)? - pair_functional(x, lambda)?).abs())
}
