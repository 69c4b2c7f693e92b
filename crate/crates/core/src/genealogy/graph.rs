//! Erdős–Rényi graphs on shared uniforms.

use std::collections::VecDeque;

use rand::Rng;

use super::{index_labels, uniform_space, SimConfig, SimMeta, SimOutput};
use crate::error::{MmError, Result};
use crate::rng::substream;

/// Graph distances from every vertex; unreachable vertices get `n`.
fn all_pairs_bfs(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut d = vec![n as f64; n * n];
    for s in 0..n {
        let mut seen = vec![false; n];
        seen[s] = true;
        d[s * n + s] = 0.0;
        let mut queue = VecDeque::from([(s, 0usize)]);
        while let Some((u, k)) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    d[s * n + v] = (k + 1) as f64;
                    queue.push_back((v, k + 1));
                }
            }
        }
    }
    d
}

/// One `ER(n, p)` space per entry of `cfg.p`, all built from the same
/// uniforms `U_ij` (edge iff `U_ij <= p`), so larger `p` gives a supergraph.
/// Distances are shortest-path lengths (`n` when disconnected), masses `1/n`.
pub fn simulate_er_family(cfg: &SimConfig) -> Result<SimOutput> {
    let n = cfg.n;
    if n == 0 {
        return Err(MmError::Parameter("the graph needs at least one vertex".into()));
    }
    if let Some(p) = cfg.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(MmError::Parameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = substream(cfg.seed, 0);
    let mut uniforms = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            uniforms.push((i, j, rng.random::<f64>()));
        }
    }
    let mut spaces = Vec::with_capacity(cfg.p.len());
    let mut raw = Vec::with_capacity(cfg.p.len());
    let mut events = Vec::with_capacity(cfg.p.len());
    for &p in &cfg.p {
        let mut adj = vec![Vec::new(); n];
        let mut edges = 0;
        for &(i, j, u) in &uniforms {
            if u <= p {
                adj[i].push(j);
                adj[j].push(i);
                edges += 1;
            }
        }
        let d = all_pairs_bfs(&adj);
        spaces.push(uniform_space(&d, n, 1.0 / n as f64, index_labels(n))?);
        raw.push(d);
        events.push(edges);
    }
    Ok(SimOutput {
        spaces,
        meta: SimMeta {
            config: cfg.clone(),
            kind: "shared-uniforms".into(),
            events,
            raw,
            extinct: false,
            retries: 0,
            inclusion: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(n: usize, p: Vec<f64>, seed: u64) -> SimOutput {
        simulate_er_family(&SimConfig {
            seed,
            n,
            p,
            ..SimConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn extreme_probabilities() {
        let out = run(4, vec![1.0, 0.0], 1);
        for i in 0..4 {
            for j in 0..4 {
                let (full, none) = (out.spaces[0].dist(i, j).to_f64(), out.spaces[1].dist(i, j).to_f64());
                assert_eq!(full, if i == j { 0.0 } else { 1.0 });
                assert_eq!(none, if i == j { 0.0 } else { 4.0 });
            }
        }
    }

    #[test]
    fn distances_shrink_with_p() {
        for seed in 0..30 {
            let out = run(6, vec![0.2, 0.5, 0.9], seed);
            for w in out.meta.raw.windows(2) {
                assert!(w[1].iter().zip(&w[0]).all(|(a, b)| a <= b));
            }
        }
    }

    #[test]
    fn bad_probability() {
        assert!(simulate_er_family(&SimConfig {
            p: vec![1.5],
            ..SimConfig::default()
        })
        .is_err());
    }
}
