//! Backtracking searches behind the order checkers.
//!
//! Points of the map's domain are assigned largest mass first and candidate
//! targets are tried in order of decreasing mass slack. Neither choice
//! affects a verdict, only how quickly it is reached.

use super::OrderWitness;
use crate::mmcore::scalar::{sum_in, Mode, Scalar};
use crate::mmcore::space::FiniteMmSpace;

pub(super) struct Problem<'a> {
    x: &'a FiniteMmSpace,
    y: &'a FiniteMmSpace,
    xs: Vec<usize>,
    ys: Vec<usize>,
    tol: f64,
    pub nodes: u64,
}

impl<'a> Problem<'a> {
    pub fn new(x: &'a FiniteMmSpace, y: &'a FiniteMmSpace, tol: f64) -> Self {
        let by_mass_desc = |s: &FiniteMmSpace| {
            let mut idx = s.support();
            idx.sort_by(|&a, &b| s.mass(b).cmp(s.mass(a)).then(a.cmp(&b)));
            idx
        };
        Self {
            xs: by_mass_desc(x),
            ys: by_mass_desc(y),
            x,
            y,
            tol,
            nodes: 0,
        }
    }

    fn le(&self, a: &Scalar, b: &Scalar) -> bool {
        a.le_tol(b, self.tol)
    }

    fn eq(&self, a: &Scalar, b: &Scalar) -> bool {
        a.eq_tol(b, self.tol)
    }

    fn zero(&self) -> Scalar {
        if self.x.mode() == Mode::Exact && self.y.mode() == Mode::Exact {
            Scalar::zero(Mode::Exact)
        } else {
            Scalar::zero(Mode::Float)
        }
    }

    // ---------- ≤measure ----------

    /// Isometric injection of `supp(mu_X)` into `supp(mu_Y)` with mass domination.
    pub fn measure(&mut self) -> Option<OrderWitness> {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        if nx > ny {
            return None;
        }
        // a y-point can host an x-point only if its distance profile contains x's
        let row = |s: &FiniteMmSpace, i: usize, pts: &[usize]| {
            let mut r: Vec<Scalar> = pts.iter().filter(|&&j| j != i).map(|&j| s.dist(i, j).clone()).collect();
            r.sort();
            r
        };
        let xrows: Vec<Vec<Scalar>> = self.xs.iter().map(|&i| row(self.x, i, &self.xs)).collect();
        let yrows: Vec<Vec<Scalar>> = self.ys.iter().map(|&j| row(self.y, j, &self.ys)).collect();
        let mut allowed = vec![vec![false; ny]; nx];
        for a in 0..nx {
            for b in 0..ny {
                allowed[a][b] = self.le(self.x.mass(self.xs[a]), self.y.mass(self.ys[b]))
                    && contains_within(&yrows[b], &xrows[a], self.tol);
            }
        }
        let mut image = Vec::with_capacity(nx);
        let mut used = vec![false; ny];
        if self.measure_rec(&allowed, &mut image, &mut used) {
            let embedding = image
                .iter()
                .enumerate()
                .map(|(a, &b)| (self.xs[a], self.ys[b]))
                .collect();
            Some(OrderWitness::Measure { embedding })
        } else {
            None
        }
    }

    fn measure_rec(&mut self, allowed: &[Vec<bool>], image: &mut Vec<usize>, used: &mut [bool]) -> bool {
        self.nodes += 1;
        let a = image.len();
        if a == self.xs.len() {
            return true;
        }
        let mut cands: Vec<usize> = (0..self.ys.len()).filter(|&b| !used[b] && allowed[a][b]).collect();
        cands.sort_by(|&p, &q| {
            let sp = self.y.mass(self.ys[p]) - self.x.mass(self.xs[a]);
            let sq = self.y.mass(self.ys[q]) - self.x.mass(self.xs[a]);
            sq.cmp(&sp).then(p.cmp(&q))
        });
        for b in cands {
            let fits = image.iter().enumerate().all(|(a2, &b2)| {
                self.eq(
                    self.x.dist(self.xs[a], self.xs[a2]),
                    self.y.dist(self.ys[b], self.ys[b2]),
                )
            });
            if !fits {
                continue;
            }
            image.push(b);
            used[b] = true;
            if self.measure_rec(allowed, image, used) {
                return true;
            }
            used[b] = false;
            image.pop();
        }
        false
    }

    // ---------- shared helpers for maps Y -> X ----------

    fn sub_isometric(&self, b: usize, a: usize, assign: &[Option<usize>]) -> bool {
        assign.iter().enumerate().all(|(b2, slot)| match slot {
            Some(a2) => self.le(
                self.x.dist(self.xs[a], self.xs[*a2]),
                self.y.dist(self.ys[b], self.ys[b2]),
            ),
            None => true,
        })
    }

    fn ymass(&self, b: usize) -> &Scalar {
        self.y.mass(self.ys[b])
    }

    fn xmass(&self, a: usize) -> &Scalar {
        self.x.mass(self.xs[a])
    }

    // ---------- ≤metric ----------

    /// Measure-preserving sub-isometry `supp(mu_Y) -> supp(mu_X)`.
    pub fn metric(&mut self) -> Option<OrderWitness> {
        let nx = self.xs.len();
        let ny = self.ys.len();
        if nx == 0 {
            return (ny == 0).then(|| OrderWitness::Metric { tau: Vec::new() });
        }
        let remaining: Vec<Scalar> = (0..nx).map(|a| self.xmass(a).clone()).collect();
        let mut assign: Vec<Option<usize>> = vec![None; ny];
        let mut suffix = vec![self.zero(); ny + 1];
        for b in (0..ny).rev() {
            suffix[b] = &suffix[b + 1] + self.ymass(b);
        }
        let mut remaining = remaining;
        if self.metric_rec(0, &mut assign, &mut remaining, &suffix) {
            let tau = assign
                .iter()
                .enumerate()
                .map(|(b, a)| (self.ys[b], self.xs[a.expect("complete assignment")]))
                .collect();
            Some(OrderWitness::Metric { tau })
        } else {
            None
        }
    }

    fn metric_rec(
        &mut self,
        b: usize,
        assign: &mut [Option<usize>],
        remaining: &mut [Scalar],
        suffix: &[Scalar],
    ) -> bool {
        self.nodes += 1;
        let nx = self.xs.len();
        if b == self.ys.len() {
            return remaining.iter().all(|r| self.eq(r, &self.zero()));
        }
        // every unfilled x needs some unassigned y light enough to enter it
        let lightest = (b..self.ys.len()).map(|q| self.ymass(q)).min();
        for r in remaining.iter() {
            let open = !self.le(r, &self.zero());
            if open && !lightest.is_some_and(|l| self.le(l, r)) {
                return false;
            }
        }
        if !self.le(&sum_in(self.zero().mode(), remaining.iter().cloned()), &suffix[b]) {
            return false;
        }
        let mb = self.ymass(b).clone();
        let mut cands: Vec<usize> = (0..nx).filter(|&a| self.le(&mb, &remaining[a])).collect();
        cands.sort_by(|&p, &q| remaining[q].cmp(&remaining[p]).then(p.cmp(&q)));
        for a in cands {
            if !self.sub_isometric(b, a, assign) {
                continue;
            }
            assign[b] = Some(a);
            let before = remaining[a].clone();
            remaining[a] = &before - &mb;
            if self.metric_rec(b + 1, assign, remaining, suffix) {
                return true;
            }
            remaining[a] = before;
            assign[b] = None;
        }
        false
    }

    // ---------- ≤gen ----------

    /// Subset `S` of `supp(mu_Y)` with a sub-isometry onto `supp(mu_X)` whose
    /// fibres carry at least the target masses.
    pub fn gen(&mut self) -> Option<OrderWitness> {
        let nx = self.xs.len();
        let ny = self.ys.len();
        if nx == 0 {
            return Some(OrderWitness::Gen {
                used: Vec::new(),
                g: Vec::new(),
                submass: Vec::new(),
            });
        }
        let mut suffix = vec![self.zero(); ny + 1];
        for b in (0..ny).rev() {
            suffix[b] = &suffix[b + 1] + self.ymass(b);
        }
        let mut assign: Vec<Option<usize>> = vec![None; ny];
        let mut covered: Vec<Scalar> = vec![self.zero(); nx];
        let mut hit = vec![0usize; nx];
        if !self.gen_rec(0, &mut assign, &mut covered, &mut hit, &suffix) {
            return None;
        }
        Some(self.gen_witness(&assign, &covered))
    }

    fn deficit(&self, covered: &[Scalar]) -> Scalar {
        let z = self.zero();
        sum_in(
            z.mode(),
            covered
                .iter()
                .enumerate()
                .map(|(a, c)| (self.xmass(a) - c).max(z.clone())),
        )
    }

    fn gen_rec(
        &mut self,
        b: usize,
        assign: &mut [Option<usize>],
        covered: &mut [Scalar],
        hit: &mut [usize],
        suffix: &[Scalar],
    ) -> bool {
        self.nodes += 1;
        let nx = self.xs.len();
        let done = (0..nx).all(|a| hit[a] > 0 && self.le(self.xmass(a), &covered[a]));
        if done {
            return true;
        }
        if b == self.ys.len() {
            return false;
        }
        if !self.le(&self.deficit(covered), &suffix[b]) {
            return false;
        }
        let unhit = hit.iter().filter(|&&h| h == 0).count();
        if unhit > self.ys.len() - b {
            return false;
        }
        let mb = self.ymass(b).clone();
        // targets still short of mass first, by largest shortfall
        let mut cands: Vec<usize> = (0..nx).collect();
        cands.sort_by(|&p, &q| {
            let dp = self.xmass(p) - &covered[p];
            let dq = self.xmass(q) - &covered[q];
            dq.cmp(&dp).then(p.cmp(&q))
        });
        for a in cands {
            if !self.sub_isometric(b, a, assign) {
                continue;
            }
            assign[b] = Some(a);
            covered[a] = &covered[a] + &mb;
            hit[a] += 1;
            if self.gen_rec(b + 1, assign, covered, hit, suffix) {
                return true;
            }
            hit[a] -= 1;
            covered[a] = &covered[a] - &mb;
            assign[b] = None;
        }
        // leave y out of S
        self.gen_rec(b + 1, assign, covered, hit, suffix)
    }

    fn gen_witness(&self, assign: &[Option<usize>], covered: &[Scalar]) -> OrderWitness {
        let mut used = Vec::new();
        let mut g = Vec::new();
        let mut submass = Vec::new();
        for (b, slot) in assign.iter().enumerate() {
            if let Some(a) = slot {
                let y = self.ys[b];
                used.push(y);
                g.push((y, self.xs[*a]));
                // proportional share of the target mass
                let w = &(self.ymass(b) * self.xmass(*a)) / &covered[*a];
                submass.push((y, w));
            }
        }
        OrderWitness::Gen { used, g, submass }
    }

    // ---------- ≤' (single global map) ----------

    pub fn global(&mut self) -> Option<OrderWitness> {
        let nx = self.xs.len();
        let ny = self.ys.len();
        if nx == 0 {
            return Some(OrderWitness::Global {
                tau: Vec::new(),
            });
        }
        if ny == 0 {
            return None;
        }
        let mut suffix = vec![self.zero(); ny + 1];
        for b in (0..ny).rev() {
            suffix[b] = &suffix[b + 1] + self.ymass(b);
        }
        let mut assign: Vec<Option<usize>> = vec![None; ny];
        let mut covered: Vec<Scalar> = vec![self.zero(); nx];
        if self.global_rec(0, &mut assign, &mut covered, &suffix) {
            let tau = assign
                .iter()
                .enumerate()
                .map(|(b, a)| (self.ys[b], self.xs[a.expect("total map")]))
                .collect();
            Some(OrderWitness::Global { tau })
        } else {
            None
        }
    }

    fn global_rec(
        &mut self,
        b: usize,
        assign: &mut [Option<usize>],
        covered: &mut [Scalar],
        suffix: &[Scalar],
    ) -> bool {
        self.nodes += 1;
        let nx = self.xs.len();
        if b == self.ys.len() {
            return (0..nx).all(|a| self.le(self.xmass(a), &covered[a]));
        }
        if !self.le(&self.deficit(covered), &suffix[b]) {
            return false;
        }
        let mb = self.ymass(b).clone();
        let mut cands: Vec<usize> = (0..nx).collect();
        cands.sort_by(|&p, &q| {
            let dp = self.xmass(p) - &covered[p];
            let dq = self.xmass(q) - &covered[q];
            dq.cmp(&dp).then(p.cmp(&q))
        });
        for a in cands {
            if !self.sub_isometric(b, a, assign) {
                continue;
            }
            assign[b] = Some(a);
            covered[a] = &covered[a] + &mb;
            if self.global_rec(b + 1, assign, covered, suffix) {
                return true;
            }
            covered[a] = &covered[a] - &mb;
            assign[b] = None;
        }
        false
    }
}

/// Whether the sorted multiset `small` embeds into the sorted multiset `big`
/// with entries matched up to `tol`.
fn contains_within(big: &[Scalar], small: &[Scalar], tol: f64) -> bool {
    let mut i = 0;
    for s in small {
        loop {
            if i == big.len() {
                return false;
            }
            if big[i].eq_tol(s, tol) {
                i += 1;
                break;
            }
            if big[i] > *s {
                return false;
            }
            i += 1;
        }
    }
    true
}
