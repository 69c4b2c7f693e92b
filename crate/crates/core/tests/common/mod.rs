//! Random and enumerated spaces shared by the integration tests.
#![allow(dead_code)]

use mmorder::rng::SimRng;
use mmorder::{FiniteMmSpace, Scalar};
use rand::Rng;

pub fn x1() -> FiniteMmSpace {
    FiniteMmSpace::from_ratios(&[vec![(0, 1), (1, 1)], vec![(1, 1), (0, 1)]], &[(1, 2), (1, 2)]).unwrap()
}

/// Points of `Z^2` under the l1 metric, integer valued so float spaces stay exact.
pub fn grid_points(n: usize, side: i64, rng: &mut SimRng) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = (rng.random_range(0..side), rng.random_range(0..side));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts
}

pub fn l1(a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - b.0).abs() + (a.1 - b.1).abs()
}

/// Positive integer weights summing to `total`-normalized floats.
pub fn random_weights(n: usize, rng: &mut SimRng) -> Vec<i64> {
    (0..n).map(|_| rng.random_range(1..=4)).collect()
}

/// Exact random space on grid points with masses `w_i / sum(w)` (or raw `w_i`).
pub fn random_exact(n: usize, normalized: bool, rng: &mut SimRng) -> FiniteMmSpace {
    let pts = grid_points(n, 4, rng);
    let w = random_weights(n, rng);
    let total: i64 = w.iter().sum();
    let rows: Vec<Vec<(i64, i64)>> = pts
        .iter()
        .map(|&a| pts.iter().map(|&b| (l1(a, b), 1)).collect())
        .collect();
    let mass: Vec<(i64, i64)> = w.iter().map(|&v| if normalized { (v, total) } else { (v, 1) }).collect();
    FiniteMmSpace::from_ratios(&rows, &mass).unwrap()
}

/// Random exact ultrametric built by merging clusters at increasing integer heights.
pub fn random_ultrametric(n: usize, rng: &mut SimRng) -> FiniteMmSpace {
    let mut d = vec![vec![0i64; n]; n];
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut height = 0;
    while clusters.len() > 1 {
        height += rng.random_range(1..=2);
        let a = rng.random_range(0..clusters.len());
        let mut b = rng.random_range(0..clusters.len() - 1);
        if b >= a {
            b += 1;
        }
        let merged = clusters[b].clone();
        for &i in &clusters[a] {
            for &j in &merged {
                d[i][j] = height;
                d[j][i] = height;
            }
        }
        clusters[a].extend(merged);
        clusters.remove(b);
    }
    let rows: Vec<Vec<(i64, i64)>> = d.iter().map(|r| r.iter().map(|&v| (v, 1)).collect()).collect();
    let mass: Vec<(i64, i64)> = random_weights(n, rng).into_iter().map(|w| (w, 2)).collect();
    FiniteMmSpace::from_ratios(&rows, &mass).unwrap()
}

pub fn max_distance(x: &FiniteMmSpace) -> Scalar {
    let mut best = Scalar::zero(x.mode());
    for i in 0..x.len() {
        for j in 0..x.len() {
            best = best.max(x.dist(i, j).clone());
        }
    }
    best
}

/// Pair `(x, y)` of float probability spaces with `x ≤metric y`: `y` lives on
/// at most four grid points, `x` is the pushforward of `y` under a random
/// surjection `tau`, and `r_Y = r_X ∘ tau + alpha · D + beta` off the diagonal
/// for a metric `D` on `Y`.
pub fn dominated_pair(rng: &mut SimRng) -> (FiniteMmSpace, FiniteMmSpace) {
    let ny = rng.random_range(1..=4);
    let nx = rng.random_range(1..=ny);
    let xp = grid_points(nx, 4, rng);
    let yp = grid_points(ny, 4, rng);
    // surjection: first nx points hit every class, the rest are random
    let mut tau: Vec<usize> = (0..ny).map(|j| if j < nx { j } else { rng.random_range(0..nx) }).collect();
    for j in (1..ny).rev() {
        let k = rng.random_range(0..=j);
        tau.swap(j, k);
    }
    let alpha = [0.0, 0.5, 1.0][rng.random_range(0..3)];
    // the discrete part keeps y a metric when tau merges points
    let beta = if nx == ny { [0.0, 0.5][rng.random_range(0..2)] } else { [0.5, 1.0][rng.random_range(0..2)] };
    let w = random_weights(ny, rng);
    let total: i64 = w.iter().sum();
    let ymass: Vec<f64> = w.iter().map(|&v| v as f64 / total as f64).collect();
    let mut xmass = vec![0.0; nx];
    for j in 0..ny {
        xmass[tau[j]] += ymass[j];
    }
    let xrows: Vec<Vec<f64>> = xp.iter().map(|&a| xp.iter().map(|&b| l1(a, b) as f64).collect()).collect();
    let yrows: Vec<Vec<f64>> = (0..ny)
        .map(|a| {
            (0..ny)
                .map(|b| {
                    if a == b {
                        0.0
                    } else {
                        xrows[tau[a]][tau[b]] + alpha * l1(yp[a], yp[b]) as f64 + beta
                    }
                })
                .collect()
        })
        .collect();
    (
        FiniteMmSpace::from_f64(&xrows, &xmass).unwrap(),
        FiniteMmSpace::from_f64(&yrows, &ymass).unwrap(),
    )
}

/// Every space with at most three points, distances in `{1, 2}` and masses in `{1/2, 1}`.
pub fn small_grid_spaces() -> Vec<FiniteMmSpace> {
    let mut out = Vec::new();
    let masses = [(1, 2), (1, 1)];
    for n in 1..=3usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        for dcode in 0..(1usize << pairs.len()) {
            let mut rows = vec![vec![(0i64, 1i64); n]; n];
            for (b, &(i, j)) in pairs.iter().enumerate() {
                let v = 1 + ((dcode >> b) & 1) as i64;
                rows[i][j] = (v, 1);
                rows[j][i] = (v, 1);
            }
            for mcode in 0..(1usize << n) {
                let mass: Vec<(i64, i64)> = (0..n).map(|i| masses[(mcode >> i) & 1]).collect();
                out.push(FiniteMmSpace::from_ratios(&rows, &mass).unwrap());
            }
        }
    }
    out
}
