//! Named reference scenarios and the small estimators behind `estimate`.

use anyhow::{ensure, Result};
use clap::ValueEnum;
use rand::Rng;
use serde_json::json;

use mmorder::genealogy::{
    sample_stationary_pair_distance, simulate_coupled_coalescent_trees, simulate_coupled_gw, simulate_er_family,
    PairDistanceSource, SimConfig,
};
use mmorder::mmcore::{
    eval_block_orthant, pair_functional, scalar_action, ActionKind, EvalMode, Kernel, Monomial,
};
use mmorder::order::{le_gen, le_global_map, le_measure, le_metric, verify_witness, CheckOptions};
use mmorder::stats::{estimate_expected_monomial, estimate_wasserstein_coupled, Estimate};
use mmorder::transport::{eurandom, lub, EurandomConfig};
use mmorder::{FiniteMmSpace, Scalar};

use crate::Report;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Scenario {
    M10Threshold,
    PonyOrder,
    EurandomClosedForm,
    LubIdentity,
    ErMonotone,
    MoranCoupling,
    GwSubtree,
    FvWasserstein,
}

pub fn run(s: Scenario) -> Result<Report> {
    let (text, json) = match s {
        Scenario::M10Threshold => m10_threshold()?,
        Scenario::PonyOrder => pony_order()?,
        Scenario::EurandomClosedForm => eurandom_closed_form()?,
        Scenario::LubIdentity => lub_identity()?,
        Scenario::ErMonotone => er_monotone()?,
        Scenario::MoranCoupling => coalescent_coupling()?,
        Scenario::GwSubtree => gw_subtree()?,
        Scenario::FvWasserstein => fv_wasserstein()?,
    };
    let ok = json["ok"].as_bool().unwrap_or(false);
    Ok(Report { text, json, ok })
}

type Out = (String, serde_json::Value);

/// Two points at distance 1 with mass 1/2 each.
fn two_point() -> Result<FiniteMmSpace> {
    Ok(FiniteMmSpace::from_ratios(
        &[vec![(0, 1), (1, 1)], vec![(1, 1), (0, 1)]],
        &[(1, 2), (1, 2)],
    )?)
}

fn m10_threshold() -> Result<Out> {
    let x = two_point()?;
    let y = FiniteMmSpace::from_ratios(
        &[
            vec![(0, 1), (1, 1), (2, 1)],
            vec![(1, 1), (0, 1), (2, 1)],
            vec![(2, 1), (2, 1), (0, 1)],
        ],
        &[(1, 3), (1, 3), (1, 3)],
    )?;
    let mut rows = Vec::new();
    let mut flips = Vec::new();
    for k in 1..=12 {
        let (vx, vy) = (eval_block_orthant(&x, 0, 1, k)?, eval_block_orthant(&y, 0, 1, k)?);
        if vy <= vx {
            flips.push(k);
        }
        rows.push(json!({ "k": k, "x": vx.to_string(), "y": vy.to_string(), "y_le_x": vy <= vx }));
    }
    let ok = flips == (10..=12).collect::<Vec<_>>();
    Ok((
        format!("y-orthant <= x-orthant exactly for k in {flips:?}"),
        json!({ "ok": ok, "flips": flips, "values": rows }),
    ))
}

fn line(pts: &[i64]) -> Result<FiniteMmSpace> {
    let rows: Vec<Vec<(i64, i64)>> = pts.iter().map(|a| pts.iter().map(|b| ((a - b).abs(), 1)).collect()).collect();
    Ok(FiniteMmSpace::from_ratios(&rows, &vec![(1, 1); pts.len()])?)
}

fn pony_order() -> Result<Out> {
    let exact = CheckOptions::default();
    let x1 = two_point()?;
    let y1 = scalar_action(ActionKind::Metric, &Scalar::int(2), &x1)?;
    let metric = le_metric(&x1, &y1, exact)?;
    let p = FiniteMmSpace::point(Scalar::int(1));
    let p2 = scalar_action(ActionKind::Measure, &Scalar::int(2), &p)?;
    let measure = le_measure(&p, &p2, exact)?;
    let (x, y) = (line(&[1, 2, 4])?, line(&[1, 2, 3, 4])?);
    let gen = le_gen(&x, &y, exact)?;
    let global = le_global_map(&x, &y, exact)?;
    let mut verified = true;
    for (a, b, d) in [(&x1, &y1, &metric), (&p, &p2, &measure), (&x, &y, &gen)] {
        if let Some(w) = &d.witness {
            verified &= verify_witness(a, b, w, 0.0).is_ok();
        }
    }
    let ok = metric.verdict && measure.verdict && gen.verdict && !global.verdict && verified;
    Ok((
        format!(
            "x ≤metric 2x: {}; p ≤measure 2·p: {}; line gen: {}; line global: {}; witnesses verified: {verified}",
            metric.verdict, measure.verdict, gen.verdict, global.verdict
        ),
        json!({ "ok": ok, "metric": metric, "measure": measure, "gen": gen, "global": global }),
    ))
}

fn eurandom_closed_form() -> Result<Out> {
    let x = two_point()?;
    let y = scalar_action(ActionKind::Metric, &Scalar::int(2), &x)?;
    let r = eurandom(&x, &y, 1.0, &EurandomConfig::default())?;
    let want = pair_functional(&y, 1.0)? - pair_functional(&x, 1.0)?;
    let ok = r.certified && (r.upper_bound - want).abs() <= 1e-6;
    Ok((
        format!("d = {:.12}, closed form {:.12}, certified: {}", r.upper_bound, want, r.certified),
        json!({ "ok": ok, "value": r.upper_bound, "closed_form": want, "certified": r.certified }),
    ))
}

fn lub_identity() -> Result<Out> {
    let x = two_point()?;
    let y = scalar_action(ActionKind::Metric, &Scalar::int(2), &x)?;
    let l = lub(&x, &y, 1.0, &EurandomConfig::default(), false)?;
    let ok = l.report.le_metric == [true, true] && l.report.residual <= 1e-6;
    Ok((
        format!(
            "zbar has {} points; le_metric {:?}; d12 = {:.9}, d1z + dz2 = {:.9}",
            l.zbar.len(),
            l.report.le_metric,
            l.report.d12,
            l.report.d1z + l.report.dz2
        ),
        json!({ "ok": ok, "report": l.report }),
    ))
}

fn er_monotone() -> Result<Out> {
    let opts = CheckOptions::with_tol(1e-9);
    let mut failures = Vec::new();
    let mut trials = 0;
    for n in 3..=7 {
        for seed in 0..20 {
            let out = simulate_er_family(&SimConfig {
                seed,
                n,
                p: vec![0.7, 0.3],
                ..SimConfig::default()
            })?;
            if !le_metric(&out.spaces[0], &out.spaces[1], opts)?.verdict {
                failures.push((n, seed));
            }
            trials += 1;
        }
    }
    Ok((
        format!("{}/{trials} ER(0.7) ≤metric ER(0.3) trials related", trials - failures.len()),
        json!({ "ok": failures.is_empty(), "trials": trials, "failures": failures }),
    ))
}

fn coalescent_coupling() -> Result<Out> {
    let opts = CheckOptions::with_tol(1e-9);
    let (gamma, gamma2) = (1.0, 1.0);
    let ratio = gamma / (gamma + gamma2);
    let mut failures = Vec::new();
    let mut trials = 0;
    for n in 2..=7 {
        for seed in 0..20 {
            let out = simulate_coupled_coalescent_trees(&SimConfig {
                seed,
                n,
                gamma,
                gamma_prime: gamma2,
                ..SimConfig::default()
            })?;
            let related = le_metric(&out.spaces[1], &out.spaces[0], opts)?.verdict;
            let exact = out.meta.raw[1].iter().zip(&out.meta.raw[0]).all(|(f, s)| *f == s * ratio);
            if !(related && exact) {
                failures.push((n, seed));
            }
            trials += 1;
        }
    }
    Ok((
        format!(
            "{}/{trials} coupled trees related with raw distance ratio {ratio}",
            trials - failures.len()
        ),
        json!({ "ok": failures.is_empty(), "trials": trials, "ratio": ratio, "failures": failures }),
    ))
}

fn gw_subtree() -> Result<Out> {
    let opts = CheckOptions {
        tol: Some(1e-9),
        max_points: usize::MAX,
    };
    let mut failures = Vec::new();
    let mut retries = 0;
    for seed in 0..20 {
        let out = simulate_coupled_gw(&SimConfig {
            seed,
            ..SimConfig::default()
        })?;
        retries += out.meta.retries;
        if out.meta.extinct || !le_measure(&out.spaces[0], &out.spaces[1], opts)?.verdict {
            failures.push(seed);
        }
    }
    Ok((
        format!("{}/20 GW pairs related ({retries} extinction retries)", 20 - failures.len()),
        json!({ "ok": failures.is_empty(), "retries": retries, "failures": failures }),
    ))
}

fn fv_wasserstein() -> Result<Out> {
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for (g, g2, l) in [(1.0, 2.0, 1.0), (1.0, 3.0, 2.0)] {
        let want = g2 / (g2 + l) - g / (g + l);
        let e = estimate_wasserstein_coupled(g, g2, l, 100_000, 2024)?;
        ok &= e.within(want, 3.0);
        parts.push(format!("{:.5} ± {:.5} (closed form {:.5})", e.value, e.std_error, want));
        rows.push(json!({ "gamma": g, "gamma2": g2, "lambda": l, "estimate": e, "closed_form": want }));
    }
    Ok((parts.join("; "), json!({ "ok": ok, "cases": rows })))
}

/// `E[exp(-lambda R)]` for the stationary pair distance `R`, sampled from
/// 6-individual coalescents; the closed form is `gamma/(gamma+lambda)`.
pub fn laplace_of_pair_distance(gamma: f64, lambda: f64, reps: usize, seed: u64) -> Result<(Estimate, f64)> {
    ensure!(lambda > 0.0 && lambda.is_finite(), "lambda must be positive");
    let r = sample_stationary_pair_distance(gamma, reps, seed, PairDistanceSource::Coalescent { n: 6 })?;
    let v: Vec<f64> = r.iter().map(|d| (-lambda * d).exp()).collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let est = Estimate {
        value: mean,
        std_error: (var / n).sqrt(),
        reps,
        seed,
    };
    Ok((est, gamma / (gamma + lambda)))
}

/// `E<1 - exp(-lambda r12), nu^{2,X}>` over uncapped `n`-coalescent trees at
/// rate `gamma`. Distinct sampled points are at `Exp(gamma)` distance and a
/// repeated point (probability `1/n`) at distance zero.
pub fn coalescent_pair_monomial(gamma: f64, lambda: f64, n: usize, reps: usize, seed: u64) -> Result<(Estimate, f64)> {
    let phi = Monomial::new(2, Kernel::OneMinusExp(vec![lambda]))?;
    let est = estimate_expected_monomial(
        |rng| {
            let out = simulate_coupled_coalescent_trees(&SimConfig {
                seed: rng.random(),
                n,
                gamma,
                gamma_prime: 0.0,
                ..SimConfig::default()
            })?;
            Ok(out.spaces.into_iter().next().expect("slow tree"))
        },
        &phi,
        EvalMode::default(),
        reps,
        seed,
    )?;
    let target = (1.0 - 1.0 / n as f64) * lambda / (gamma + lambda);
    Ok((est, target))
}
