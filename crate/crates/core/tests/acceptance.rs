//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! Reference values are recomputed here from closed forms with independent
//! arithmetic rather than taken from the library.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};

use mmorder::genealogy::{
    sample_stationary_pair_distance, simulate_coupled_coalescent_trees, simulate_coupled_gw, simulate_er_family,
    PairDistanceSource, SimConfig,
};
use mmorder::mmcore::{
    box_plus, canonicalize, concat_h, eval_block_orthant, is_equivalent, pair_functional,
    scalar_action, ActionKind, LpExponent,
};
use mmorder::order::{
    check_nu_dominance, compare, le_gen, le_global_map, le_measure, le_metric, verify_witness, CheckOptions,
    OrderKind,
};
use mmorder::rng::substream;
use mmorder::stats::{
    estimate_wasserstein_coupled, test_first_order_dominance_1d, DominanceOptions,
};
use mmorder::transport::{eurandom, lub, EurandomConfig};
use mmorder::{FiniteMmSpace, MmError, Scalar};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: MmError) -> String {
    e.to_string()
}

fn rat(n: &BigInt, d: &BigInt) -> BigRational {
    BigRational::new(n.clone(), d.clone())
}

fn orthant_threshold() -> Outcome {
    let x = common::x1();
    let y = FiniteMmSpace::from_ratios(
        &[
            vec![(0, 1), (1, 1), (2, 1)],
            vec![(1, 1), (0, 1), (2, 1)],
            vec![(2, 1), (2, 1), (0, 1)],
        ],
        &[(1, 3), (1, 3), (1, 3)],
    )
    .map_err(err)?;
    let two = BigInt::from(2);
    let three = BigInt::from(3);
    let mut flips = Vec::new();
    for k in 1..=12u32 {
        let want_x = rat(&two, &Pow::pow(&two, 2 * k));
        let pk = Pow::pow(&two, k);
        let want_y = rat(&(&three * &pk + &three * (&pk - &two)), &Pow::pow(&three, 2 * k));
        let vx = eval_block_orthant(&x, 0, 1, k as usize).map_err(err)?;
        let vy = eval_block_orthant(&y, 0, 1, k as usize).map_err(err)?;
        ensure(vx.as_rational() == Some(&want_x), || format!("k={k}: x value {vx}"))?;
        ensure(vy.as_rational() == Some(&want_y), || format!("k={k}: y value {vy}"))?;
        let dominated = want_y <= want_x;
        // 2^{k+1} - 2 <= (3/2)^{2k-1}
        let closed = rat(&(Pow::pow(&two, k + 1) - &two), &BigInt::one())
            <= Pow::pow(rat(&three, &two), (2 * k - 1) as i32);
        ensure(dominated == closed, || format!("k={k}: closed form disagrees"))?;
        ensure(dominated == (k >= 10), || format!("k={k}: domination is {dominated}"))?;
        if dominated {
            flips.push(k);
        }
    }
    Ok(format!("exact values k=1..12, y-orthant <= x-orthant exactly for k in {flips:?}"))
}

fn order_examples() -> Outcome {
    let exact = CheckOptions::default();
    let x1 = common::x1();
    let y1 = scalar_action(ActionKind::Metric, &Scalar::int(2), &x1).map_err(err)?;
    let d = le_metric(&x1, &y1, exact).map_err(err)?;
    let w = d.witness.ok_or("le_metric(x1, 2*x1) has no witness")?;
    verify_witness(&x1, &y1, &w, 0.0)?;

    let x2 = FiniteMmSpace::point(Scalar::int(1));
    let y2 = scalar_action(ActionKind::Measure, &Scalar::int(2), &x2).map_err(err)?;
    let d = le_measure(&x2, &y2, exact).map_err(err)?;
    verify_witness(&x2, &y2, d.witness.as_ref().ok_or("le_measure(x2, 2.x2) false")?, 0.0)?;

    let line = |pts: &[i64]| {
        let rows: Vec<Vec<(i64, i64)>> = pts.iter().map(|a| pts.iter().map(|b| ((a - b).abs(), 1)).collect()).collect();
        FiniteMmSpace::from_ratios(&rows, &vec![(1, 1); pts.len()])
    };
    let x = line(&[1, 2, 4]).map_err(err)?;
    let y = line(&[1, 2, 3, 4]).map_err(err)?;
    let g = le_gen(&x, &y, exact).map_err(err)?;
    verify_witness(&x, &y, g.witness.as_ref().ok_or("le_gen false on the line pair")?, 0.0)?;
    let glob = le_global_map(&x, &y, exact).map_err(err)?;
    ensure(!glob.verdict, || "le_global_map unexpectedly true".into())?;
    Ok("metric witness, measure witness, gen true / global false".into())
}

fn dominated_eurandom() -> Outcome {
    let cfg = EurandomConfig::default();
    let lambda = 1.0;
    let mut worst: f64 = 0.0;
    let mut worst_self: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = substream(0xE0, seed);
        let (x, y) = common::dominated_pair(&mut rng);
        ensure(le_metric(&x, &y, CheckOptions::default()).map_err(err)?.verdict, || {
            format!("seed {seed}: constructed pair is not dominated")
        })?;
        let r = eurandom(&x, &y, lambda, &cfg).map_err(err)?;
        let want = pair_functional(&y, lambda).map_err(err)? - pair_functional(&x, lambda).map_err(err)?;
        ensure(r.certified, || format!("seed {seed}: not certified ({} vs {})", r.upper_bound, r.lower_bound))?;
        let dev = (r.upper_bound - want).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-6, || format!("seed {seed}: value {} vs {want}", r.upper_bound))?;
        let s = eurandom(&x, &x, lambda, &cfg).map_err(err)?;
        worst_self = worst_self.max(s.upper_bound.abs());
        ensure(s.upper_bound.abs() <= 1e-9, || format!("seed {seed}: dEur(x,x) = {}", s.upper_bound))?;
    }
    Ok(format!("50/50 certified, max |d - closed form| = {worst:.2e}, max dEur(x,x) = {worst_self:.2e}"))
}

fn lub_identity() -> Outcome {
    let cfg = EurandomConfig::default();
    let lambda = 1.0;
    let mut accepted = 0;
    let mut tried = 0;
    let mut worst: f64 = 0.0;
    let mut seed = 0u64;
    while accepted < 20 {
        ensure(tried < 2000, || format!("only {accepted} certified pairs in {tried} draws"))?;
        tried += 1;
        let mut rng = substream(0x1B, seed);
        seed += 1;
        use rand::Rng;
        let (n1, n2) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let x1 = common::random_exact(n1, true, &mut rng);
        let x2 = common::random_exact(n2, true, &mut rng);
        let d = eurandom(&x1, &x2, lambda, &cfg).map_err(err)?;
        if !d.certified {
            continue;
        }
        accepted += 1;
        let l = lub(&x1, &x2, lambda, &cfg, false).map_err(err)?;
        ensure(l.report.le_metric == [true, true], || {
            format!("seed {}: le_metric flags {:?}", seed - 1, l.report.le_metric)
        })?;
        worst = worst.max(l.report.residual);
        ensure(l.report.residual <= 1e-6, || {
            format!("seed {}: additivity residual {:.3e}", seed - 1, l.report.residual)
        })?;
        let own = lub(&x1, &x1, lambda, &cfg, false).map_err(err)?;
        ensure(is_equivalent(&own.zbar, &canonicalize(&x1), Some(1e-9)).map_err(err)?.0, || {
            format!("seed {}: lub(x, x) differs from x", seed - 1)
        })?;
    }
    Ok(format!("20 certified pairs out of {tried} draws, max residual {worst:.2e}, lub(x,x) = x"))
}

fn semigroup_orders() -> Outcome {
    use rand::Rng;
    let big = CheckOptions {
        max_points: 16,
        ..CheckOptions::default()
    };
    let float_big = CheckOptions {
        tol: Some(1e-9),
        max_points: 16,
    };
    for seed in 0..100u64 {
        let mut rng = substream(0x5E, seed);
        let x = common::random_exact(rng.random_range(1..=4), false, &mut rng);
        let z = common::random_exact(rng.random_range(1..=4), true, &mut rng);
        for (p, opts) in [
            (LpExponent::Finite(1.0), big),
            (LpExponent::Finite(2.0), float_big),
            (LpExponent::Infinity, big),
        ] {
            let y = box_plus(&x, &z, &p).map_err(err)?;
            let d = le_metric(&x, &y, opts).map_err(err)?;
            ensure(d.verdict, || format!("seed {seed}: x not below x ⊞ z for p = {p:?}"))?;
        }
        let u = common::random_ultrametric(rng.random_range(1..=4), &mut rng);
        let w = common::random_ultrametric(rng.random_range(1..=4), &mut rng);
        let h = common::max_distance(&u).max(common::max_distance(&w)) + Scalar::int(rng.random_range(1..=2));
        let v = concat_h(&u, &w, &h).map_err(err)?;
        ensure(le_measure(&u, &v, big).map_err(err)?.verdict, || format!("seed {seed}: u not below u ⊔ w"))?;
    }
    Ok("100 box_plus pairs × p ∈ {1, 2, ∞} and 100 concatenations related".into())
}

fn er_monotone() -> Outcome {
    let opts = CheckOptions::with_tol(1e-9);
    let mut trials = 0;
    for n in 3..=7 {
        for seed in 0..100 {
            let out = simulate_er_family(&SimConfig {
                seed,
                n,
                p: vec![0.7, 0.3],
                ..SimConfig::default()
            })
            .map_err(err)?;
            let d = le_metric(&out.spaces[0], &out.spaces[1], opts).map_err(err)?;
            ensure(d.verdict, || format!("n={n} seed={seed}: ER(0.7) not below ER(0.3)"))?;
            trials += 1;
        }
    }
    Ok(format!("{trials} trials related"))
}

fn coalescent_coupling() -> Outcome {
    let opts = CheckOptions::with_tol(1e-9);
    let (gamma, gamma2) = (1.0, 1.0);
    let ratio = gamma / (gamma + gamma2);
    let mut trials = 0;
    for n in 2..=7 {
        for seed in 0..100 {
            let out = simulate_coupled_coalescent_trees(&SimConfig {
                seed,
                n,
                gamma,
                gamma_prime: gamma2,
                ..SimConfig::default()
            })
            .map_err(err)?;
            let (slow, fast) = (&out.spaces[0], &out.spaces[1]);
            ensure(le_metric(fast, slow, opts).map_err(err)?.verdict, || {
                format!("N={n} seed={seed}: fast tree not below slow tree")
            })?;
            for (f, s) in out.meta.raw[1].iter().zip(&out.meta.raw[0]) {
                ensure(*f == s * ratio, || format!("N={n} seed={seed}: {f} != {s}·{ratio}"))?;
            }
            trials += 1;
        }
    }
    Ok(format!("{trials} trials related, raw distance ratio exactly {ratio}"))
}

fn gw_subtree() -> Outcome {
    let opts = CheckOptions {
        tol: Some(1e-9),
        max_points: usize::MAX,
    };
    let mut largest = 0;
    let mut retries = 0;
    for seed in 0..100 {
        let out = simulate_coupled_gw(&SimConfig {
            seed,
            b1: 0.0,
            b2: 1.0,
            n_gw: 10,
            generations: 4,
            ..SimConfig::default()
        })
        .map_err(err)?;
        ensure(!out.meta.extinct, || format!("seed {seed}: extinct after all retries"))?;
        retries += out.meta.retries;
        largest = largest.max(out.spaces[1].len());
        ensure(le_measure(&out.spaces[0], &out.spaces[1], opts).map_err(err)?.verdict, || {
            format!("seed {seed}: b1 tree not below b2 tree")
        })?;
    }
    Ok(format!("100 non-extinct trials related ({retries} extinction retries, largest tree {largest})"))
}

fn fv_wasserstein() -> Outcome {
    let mut parts = Vec::new();
    for (g, g2, l, want) in [(1.0, 2.0, 1.0, 1.0 / 6.0), (1.0, 3.0, 2.0, 4.0 / 15.0)] {
        let e = estimate_wasserstein_coupled(g, g2, l, 100_000, 2024).map_err(err)?;
        ensure(e.within(want, 3.0), || {
            format!("gamma={g}, gamma'={g2}, lambda={l}: {} ± {} vs {want}", e.value, e.std_error)
        })?;
        parts.push(format!("{:.5} ± {:.5} (target {:.5})", e.value, e.std_error, want));
    }
    Ok(parts.join("; "))
}

fn stationary_pair_law() -> Outcome {
    let gamma = 1.0;
    let reps = 10_000;
    let direct = sample_stationary_pair_distance(gamma, reps, 2024, PairDistanceSource::Direct).map_err(err)?;
    let tree = sample_stationary_pair_distance(gamma, reps, 2025, PairDistanceSource::Coalescent { n: 6 })
        .map_err(err)?;
    let opts = DominanceOptions {
        permutations: 1000,
        seed: 7,
    };
    let ab = test_first_order_dominance_1d(&direct, &tree, 0.05, opts).map_err(err)?;
    let ba = test_first_order_dominance_1d(&tree, &direct, 0.05, opts).map_err(err)?;
    ensure(ab.accepted && ba.accepted, || {
        format!("dominance rejected: p = {:.3} / {:.3}", ab.p_value, ba.p_value)
    })?;
    let mut means = Vec::new();
    for s in [&direct, &tree] {
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        ensure((mean - 1.0 / gamma).abs() <= 3.0 * se, || format!("mean {mean} ± {se}"))?;
        means.push(format!("{mean:.4} ± {se:.4}"));
    }
    Ok(format!(
        "both directions accepted (p = {:.3}, {:.3}); means {}",
        ab.p_value,
        ba.p_value,
        means.join(", ")
    ))
}

fn property_suites() -> Outcome {
    let spaces = common::small_grid_spaces();
    let n = spaces.len();
    let exact = CheckOptions::default();
    let kinds = [OrderKind::Measure, OrderKind::Metric, OrderKind::Gen];
    let mut rel = vec![vec![vec![false; n]; n]; kinds.len()];
    let mut verified = 0;
    for (k, &kind) in kinds.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let d = match compare(kind, &spaces[i], &spaces[j], exact) {
                    Ok(d) => d,
                    // the Lipschitz order only relates equal masses
                    Err(MmError::UnequalMass(..)) if kind == OrderKind::Metric => continue,
                    Err(e) => return Err(err(e)),
                };
                if let Some(w) = &d.witness {
                    verify_witness(&spaces[i], &spaces[j], w, 0.0).map_err(|e| format!("{kind:?} {i} {j}: {e}"))?;
                    verified += 1;
                }
                ensure(d.verdict == d.witness.is_some(), || "verdict without witness".into())?;
                rel[k][i][j] = d.verdict;
            }
        }
    }
    let mut equiv = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            equiv[i][j] = is_equivalent(&spaces[i], &spaces[j], None).map_err(err)?.0;
        }
    }
    for (k, kind) in kinds.iter().enumerate() {
        let r = &rel[k];
        for i in 0..n {
            ensure(r[i][i], || format!("{kind:?} not reflexive at {i}"))?;
            for j in 0..n {
                if r[i][j] && r[j][i] {
                    ensure(equiv[i][j], || format!("{kind:?} not antisymmetric at ({i}, {j})"))?;
                }
                if !r[i][j] {
                    continue;
                }
                for l in 0..n {
                    if r[j][l] {
                        ensure(r[i][l], || format!("{kind:?} not transitive at ({i}, {j}, {l})"))?;
                    }
                }
            }
        }
    }
    // the Lipschitz order forces stochastic domination of the distance matrix measures
    let mut nu_checks = 0;
    for i in 0..n {
        for j in 0..n {
            if rel[1][i][j] {
                for m in [2, 3] {
                    let r = check_nu_dominance(&spaces[i], &spaces[j], m, 1e7, None).map_err(err)?;
                    ensure(r.dominated, || format!("nu^{m} not dominated for ({i}, {j})"))?;
                    nu_checks += 1;
                }
            }
        }
    }
    let counts: Vec<usize> = rel.iter().map(|r| r.iter().flatten().filter(|&&b| b).count()).collect();
    Ok(format!(
        "{n} spaces; related pairs measure/metric/gen = {counts:?}; {verified} witnesses re-verified; {nu_checks} nu-dominance checks"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 11] = [
        ("m=10 orthant threshold", orthant_threshold, Duration::from_secs(5)),
        ("order examples", order_examples, Duration::from_secs(1)),
        ("dominated-case Eurandom", dominated_eurandom, Duration::from_secs(30)),
        ("LUB identity", lub_identity, Duration::from_secs(30)),
        ("semigroup orders", semigroup_orders, Duration::from_secs(30)),
        ("ER monotonicity", er_monotone, Duration::from_secs(30)),
        ("Moran/coalescent coupling", coalescent_coupling, Duration::from_secs(60)),
        ("GW subtree coupling", gw_subtree, Duration::from_secs(60)),
        ("stationary Wasserstein", fv_wasserstein, Duration::from_secs(10)),
        ("stationary pairwise law", stationary_pair_law, Duration::from_secs(30)),
        ("property suites", property_suites, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if took <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {took:.2?}, budget {budget:?}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("criterion {:>2} [{name}]: {status} — {detail} ({took:.2?})", k + 1);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
