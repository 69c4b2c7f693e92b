//! Edmonds–Karp maximum flow with exact or floating capacities.

use std::collections::VecDeque;

use crate::mmcore::scalar::{Mode, Scalar};

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    rev: usize,
    cap: Scalar,
}

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    adj: Vec<Vec<Edge>>,
    mode: Mode,
    /// Residual capacities at or below this are treated as exhausted (float mode).
    eps: f64,
}

/// Handle to an edge for reading its flow afterwards.
#[derive(Clone, Copy, Debug)]
pub struct EdgeId {
    from: usize,
    idx: usize,
}

impl FlowNetwork {
    pub fn new(nodes: usize, mode: Mode, eps: f64) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            mode,
            eps,
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: Scalar) -> EdgeId {
        let cap = cap.to_mode(self.mode);
        let fwd = self.adj[from].len();
        let back = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(Edge { to, rev: back, cap });
        self.adj[to].push(Edge {
            to: from,
            rev: fwd,
            cap: Scalar::zero(self.mode),
        });
        EdgeId { from, idx: fwd }
    }

    fn live(&self, c: &Scalar) -> bool {
        match c {
            Scalar::Exact(_) => c.is_positive(),
            Scalar::Float(v) => *v > self.eps,
        }
    }

    /// Pushes the maximum flow from `s` to `t` and returns its value.
    pub fn max_flow(&mut self, s: usize, t: usize) -> Scalar {
        let mut total = Scalar::zero(self.mode);
        let n = self.adj.len();
        loop {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (k, e) in self.adj[u].iter().enumerate() {
                    if !seen[e.to] && self.live(&e.cap) {
                        seen[e.to] = true;
                        prev[e.to] = Some((u, k));
                        queue.push_back(e.to);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck: Option<Scalar> = None;
            let mut v = t;
            while let Some((u, k)) = prev[v] {
                let c = &self.adj[u][k].cap;
                bottleneck = Some(match bottleneck {
                    None => c.clone(),
                    Some(b) => b.min(c.clone()),
                });
                v = u;
            }
            let push = bottleneck.expect("path has at least one edge");
            let mut v = t;
            while let Some((u, k)) = prev[v] {
                let rev = self.adj[u][k].rev;
                let to = self.adj[u][k].to;
                self.adj[u][k].cap = &self.adj[u][k].cap - &push;
                self.adj[to][rev].cap = &self.adj[to][rev].cap + &push;
                v = u;
            }
            total = &total + &push;
        }
    }

    /// Flow currently carried by an edge added with [`add_edge`](Self::add_edge).
    pub fn flow(&self, id: EdgeId) -> Scalar {
        let e = &self.adj[id.from][id.idx];
        self.adj[e.to][e.rev].cap.clone()
    }
}
