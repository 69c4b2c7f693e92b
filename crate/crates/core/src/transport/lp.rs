//! Transportation simplex for the linear subproblems.
//!
//! Starts from the northwest-corner basis (a spanning tree of `n + m - 1`
//! cells, degenerate cells included), prices with row/column potentials and
//! pivots with Bland's rule, which rules out cycling on degenerate bases.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{MmError, Result};

/// Dense `rows × cols` plan, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub rows: usize,
    pub cols: usize,
    pub pi: Vec<f64>,
}

impl Plan {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            pi: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pi[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.pi.chunks(self.cols.max(1)).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }
}

/// Optimal plan with its cost.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub plan: Plan,
    pub value: f64,
    pub pivots: usize,
}

fn check_marginals(cost: &[f64], mu: &[f64], nu: &[f64]) -> Result<()> {
    if cost.len() != mu.len() * nu.len() {
        return Err(MmError::Structure(format!(
            "cost has {} entries, expected {}×{}",
            cost.len(),
            mu.len(),
            nu.len()
        )));
    }
    if mu.is_empty() || nu.is_empty() {
        return Err(MmError::Infeasible("empty marginal".into()));
    }
    for &v in cost.iter().chain(mu).chain(nu) {
        if !v.is_finite() {
            return Err(MmError::NonFinite(v));
        }
    }
    if let Some(v) = mu.iter().chain(nu).find(|v| **v < 0.0) {
        return Err(MmError::Infeasible(format!("negative marginal entry {v}")));
    }
    let (a, b): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
    if (a - b).abs() > 1e-9 * a.max(b).max(1.0) {
        return Err(MmError::Infeasible(format!("marginal totals differ: {a} vs {b}")));
    }
    Ok(())
}

/// Northwest-corner rule; returns the basic cells with their values.
fn northwest(mu: &[f64], nu: &[f64]) -> Vec<(usize, usize, f64)> {
    let (n, m) = (mu.len(), nu.len());
    let (mut ra, mut rb) = (mu.to_vec(), nu.to_vec());
    let (mut i, mut j) = (0, 0);
    let mut cells = Vec::with_capacity(n + m - 1);
    loop {
        let q = ra[i].min(rb[j]).max(0.0);
        ra[i] -= q;
        rb[j] -= q;
        cells.push((i, j, q));
        if i == n - 1 && j == m - 1 {
            break;
        }
        if i == n - 1 {
            j += 1;
        } else if j == m - 1 || ra[i] <= 0.0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    // rounding leftovers land in the last cell
    let last = cells.last_mut().expect("nonempty");
    last.2 += ra[n - 1].max(0.0).min(rb[m - 1].max(0.0));
    cells
}

/// Northwest-corner vertex of the transportation polytope.
pub fn northwest_corner(mu: &[f64], nu: &[f64]) -> Plan {
    let mut plan = Plan::zeros(mu.len(), nu.len());
    for (i, j, q) in northwest(mu, nu) {
        plan.pi[i * nu.len() + j] += q;
    }
    plan
}

/// Vertex obtained by running the northwest-corner rule on permuted rows and columns.
pub fn permuted_vertex(mu: &[f64], nu: &[f64], row_perm: &[usize], col_perm: &[usize]) -> Plan {
    let pm: Vec<f64> = row_perm.iter().map(|&i| mu[i]).collect();
    let pn: Vec<f64> = col_perm.iter().map(|&j| nu[j]).collect();
    let mut plan = Plan::zeros(mu.len(), nu.len());
    for (i, j, q) in northwest(&pm, &pn) {
        plan.pi[row_perm[i] * nu.len() + col_perm[j]] += q;
    }
    plan
}

struct Basis {
    n: usize,
    m: usize,
    /// `(row, col, value)`
    cells: Vec<(usize, usize, f64)>,
}

impl Basis {
    fn potentials(&self, cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (self.n, self.m);
        let mut u = vec![f64::NAN; n];
        let mut v = vec![f64::NAN; m];
        u[0] = 0.0;
        // the basis is a spanning tree, so repeated sweeps settle every potential
        let mut settled = 1;
        while settled < n + m {
            let before = settled;
            for &(i, j, _) in &self.cells {
                let c = cost[i * m + j];
                if !u[i].is_nan() && v[j].is_nan() {
                    v[j] = c - u[i];
                    settled += 1;
                } else if u[i].is_nan() && !v[j].is_nan() {
                    u[i] = c - v[j];
                    settled += 1;
                }
            }
            assert!(settled > before, "transport basis is not spanning");
        }
        (u, v)
    }

    /// Basis cells on the tree path from row `i` to column `j`, in path order.
    fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let (n, m) = (self.n, self.m);
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + m];
        for (k, &(r, c, _)) in self.cells.iter().enumerate() {
            adj[r].push((n + c, k));
            adj[n + c].push((r, k));
        }
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n + m];
        let mut seen = vec![false; n + m];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(node) = queue.pop_front() {
            if node == n + j {
                break;
            }
            for &(next, k) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    prev[next] = Some((node, k));
                    queue.push_back(next);
                }
            }
        }
        let mut out = Vec::new();
        let mut node = n + j;
        while let Some((p, k)) = prev[node] {
            out.push(k);
            node = p;
        }
        out.reverse();
        out
    }
}

/// Minimizes `sum cost[i][j] pi[i][j]` over couplings of `mu` and `nu`.
/// `cost` is row-major `mu.len() × nu.len()`.
pub fn solve_transport_lp(cost: &[f64], mu: &[f64], nu: &[f64]) -> Result<LpSolution> {
    check_marginals(cost, mu, nu)?;
    solve_from(cost, mu, nu, northwest(mu, nu))
}

fn solve_from(cost: &[f64], mu: &[f64], nu: &[f64], start: Vec<(usize, usize, f64)>) -> Result<LpSolution> {
    let (n, m) = (mu.len(), nu.len());
    let scale = cost.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1e-300);
    let eps = 1e-12 * scale;
    let mut basis = Basis { n, m, cells: start };
    let mut in_basis = vec![false; n * m];
    for &(i, j, _) in &basis.cells {
        in_basis[i * m + j] = true;
    }
    let max_pivots = 50 * (n * m + 10) * (n + m);
    let mut pivots = 0;
    loop {
        let (u, v) = basis.potentials(cost);
        // Bland: first improving cell in row-major order
        let entering = (0..n * m).find(|&k| !in_basis[k] && cost[k] - u[k / m] - v[k % m] < -eps);
        let Some(k) = entering else { break };
        if pivots >= max_pivots {
            return Err(MmError::Infeasible(format!("transport simplex exceeded {max_pivots} pivots")));
        }
        pivots += 1;
        let (ei, ej) = (k / m, k % m);
        let path = basis.path(ei, ej);
        // path cells alternate: first is in the entering row (decreases)
        let minus: Vec<usize> = path.iter().step_by(2).copied().collect();
        let theta = minus
            .iter()
            .map(|&c| basis.cells[c].2)
            .fold(f64::INFINITY, f64::min);
        // Bland: among blocking cells leave the one with smallest (row, col)
        let leave = minus
            .iter()
            .copied()
            .filter(|&c| basis.cells[c].2 <= theta)
            .min_by_key(|&c| (basis.cells[c].0, basis.cells[c].1))
            .expect("cycle has a decreasing cell");
        for (pos, &c) in path.iter().enumerate() {
            let cell = &mut basis.cells[c];
            if pos % 2 == 0 {
                cell.2 = (cell.2 - theta).max(0.0);
            } else {
                cell.2 += theta;
            }
        }
        let (li, lj, _) = basis.cells[leave];
        in_basis[li * m + lj] = false;
        in_basis[k] = true;
        basis.cells[leave] = (ei, ej, theta);
    }
    let mut plan = Plan::zeros(n, m);
    for &(i, j, q) in &basis.cells {
        plan.pi[i * m + j] = q;
    }
    let value = plan.pi.iter().zip(cost).map(|(p, c)| p * c).sum();
    Ok(LpSolution { plan, value, pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: min-cost flow by successive shortest paths (Bellman–Ford)
    /// on integer supplies, pushing one unit at a time.
    fn min_cost_flow(cost: &[f64], supply: &[i64], demand: &[i64]) -> f64 {
        let (n, m) = (supply.len(), demand.len());
        let mut flow = vec![0i64; n * m];
        let mut left_s = supply.to_vec();
        let mut left_d = demand.to_vec();
        let mut total = 0.0;
        loop {
            if left_s.iter().all(|&v| v == 0) {
                return total;
            }
            // nodes: rows 0..n, cols n..n+m; residual arcs row->col (always), col->row if flow>0
            let mut dist = vec![f64::INFINITY; n + m];
            let mut prev = vec![usize::MAX; n + m];
            for i in 0..n {
                if left_s[i] > 0 {
                    dist[i] = 0.0;
                }
            }
            for _ in 0..n + m {
                for i in 0..n {
                    for j in 0..m {
                        let c = cost[i * m + j];
                        if dist[i] + c < dist[n + j] - 1e-15 {
                            dist[n + j] = dist[i] + c;
                            prev[n + j] = i;
                        }
                        if flow[i * m + j] > 0 && dist[n + j] - c < dist[i] - 1e-15 {
                            dist[i] = dist[n + j] - c;
                            prev[i] = n + j;
                        }
                    }
                }
            }
            let end = (0..m)
                .filter(|&j| left_d[j] > 0)
                .min_by(|&a, &b| dist[n + a].total_cmp(&dist[n + b]))
                .unwrap();
            let mut node = n + end;
            while prev[node] != usize::MAX {
                let p = prev[node];
                if node >= n {
                    flow[p * m + node - n] += 1;
                } else {
                    flow[node * m + p - n] -= 1;
                }
                node = p;
            }
            left_s[node] -= 1;
            left_d[end] -= 1;
            total += dist[n + end];
        }
    }

    #[test]
    fn trivial_cases() {
        let s = solve_transport_lp(&[5.0], &[1.0], &[1.0]).unwrap();
        assert_eq!(s.value, 5.0);
        let s = solve_transport_lp(&[0.0; 4], &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.plan, northwest_corner(&[0.5, 0.5], &[0.5, 0.5]));
    }

    #[test]
    fn diagonal_plan() {
        let s = solve_transport_lp(&[0.0, 1.0, 1.0, 0.0], &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.plan.pi, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn anti_diagonal_plan_needs_pivot() {
        let s = solve_transport_lp(&[1.0, 0.0, 0.0, 1.0], &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.pivots >= 1);
    }

    #[test]
    fn matches_min_cost_flow() {
        use rand::Rng;
        let mut rng = crate::rng::substream(17, 0);
        for _ in 0..200 {
            let n = rng.random_range(1..=4);
            let m = rng.random_range(1..=4);
            let ki: Vec<i64> = (0..n).map(|_| rng.random_range(1..5)).collect();
            let kj: Vec<i64> = (0..m).map(|_| rng.random_range(1..5)).collect();
            let (a, b): (i64, i64) = (ki.iter().sum(), kj.iter().sum());
            // common denominator a*b keeps the oracle integral
            let supply: Vec<i64> = ki.iter().map(|k| k * b).collect();
            let demand: Vec<i64> = kj.iter().map(|k| k * a).collect();
            let mu: Vec<f64> = ki.iter().map(|&k| k as f64 / a as f64).collect();
            let nu: Vec<f64> = kj.iter().map(|&k| k as f64 / b as f64).collect();
            let cost: Vec<f64> = (0..n * m).map(|_| rng.random_range(0..6) as f64).collect();
            let s = solve_transport_lp(&cost, &mu, &nu).unwrap();
            let oracle = min_cost_flow(&cost, &supply, &demand) / (a * b) as f64;
            assert!((s.value - oracle).abs() < 1e-12, "{} vs {oracle}", s.value);
            for (r, t) in s.plan.row_sums().iter().zip(&mu) {
                assert!((r - t).abs() < 1e-12);
            }
            for (c, t) in s.plan.col_sums().iter().zip(&nu) {
                assert!((c - t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn infeasible_marginals() {
        assert!(matches!(
            solve_transport_lp(&[0.0], &[1.0], &[2.0]),
            Err(MmError::Infeasible(_))
        ));
    }
}
