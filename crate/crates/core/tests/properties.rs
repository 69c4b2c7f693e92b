//! Algebraic and order-theoretic laws on randomly drawn small spaces.

mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use mmorder::genealogy::{
    simulate_coupled_coalescent_trees, simulate_coupled_gw, simulate_er_family, simulate_moran, SimConfig,
};
use mmorder::mmcore::{
    box_plus, canonicalize, distance_matrix_measure, eval_monomial, is_equivalent, scalar_action, ActionKind,
    EvalMode, Kernel, LpExponent, Monomial, DEFAULT_ENUM_LIMIT,
};
use mmorder::order::{le_gen, le_measure, le_metric, CheckOptions};
use mmorder::rng::{substream, SimRng};
use mmorder::stats::{strassen_check, AtomOrder, DiscreteLaw};
use mmorder::transport::{eurandom, EurandomConfig};
use mmorder::{FiniteMmSpace, Scalar};

fn rng(seed: u64) -> SimRng {
    substream(0x9A, seed)
}

fn shuffled(x: &FiniteMmSpace, rng: &mut SimRng) -> FiniteMmSpace {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.shuffle(rng);
    x.restrict(&idx)
}

fn equivalent(a: &FiniteMmSpace, b: &FiniteMmSpace) -> bool {
    is_equivalent(a, b, None).unwrap().0
}

fn exp_pair_moment(x: &FiniteMmSpace, lambda: f64) -> f64 {
    let phi = Monomial::new(2, Kernel::ExpProduct(vec![lambda])).unwrap();
    eval_monomial(x, &phi, EvalMode::default()).unwrap().value.to_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonicalize_is_idempotent_and_relabel_invariant(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let x = common::random_exact(n, false, &mut r);
        let c = canonicalize(&x);
        prop_assert_eq!(&canonicalize(&c), &c);
        let y = shuffled(&x, &mut r);
        let cy = canonicalize(&y);
        prop_assert_eq!(cy.rows(), c.rows());
        prop_assert_eq!(cy.masses(), c.masses());
    }

    #[test]
    fn equivalence_is_an_equivalence_relation(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let x = common::random_exact(n, false, &mut r);
        let y = shuffled(&x, &mut r);
        let z = shuffled(&y, &mut r);
        prop_assert!(equivalent(&x, &x));
        prop_assert_eq!(equivalent(&x, &y), equivalent(&y, &x));
        prop_assert!(equivalent(&x, &y) && equivalent(&y, &z) && equivalent(&x, &z));
        let other = common::random_exact(n, false, &mut r);
        prop_assert_eq!(equivalent(&x, &other), equivalent(&other, &x));
        prop_assert_eq!(equivalent(&y, &other), equivalent(&x, &other));
    }

    #[test]
    fn box_plus_is_multiplicative(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3, lambda in 0.1f64..2.0) {
        let mut r = rng(seed);
        let x = common::random_exact(n, false, &mut r);
        let z = common::random_exact(m, false, &mut r);
        let p = box_plus(&x, &z, &LpExponent::Finite(1.0)).unwrap();
        prop_assert_eq!(p.total_mass(), x.total_mass() * z.total_mass());
        let (a, b, c) = (exp_pair_moment(&x, lambda), exp_pair_moment(&z, lambda), exp_pair_moment(&p, lambda));
        prop_assert!((c - a * b).abs() <= 1e-12 * (1.0 + c.abs()), "{} vs {}", c, a * b);
        // the unit point is neutral
        let unit = FiniteMmSpace::point(Scalar::int(1));
        prop_assert!(equivalent(&box_plus(&x, &unit, &LpExponent::Infinity).unwrap(), &x));
    }

    #[test]
    fn scalar_actions_compose(seed in any::<u64>(), n in 1usize..=4, a in 1i64..=5, b in 1i64..=5, d in 1i64..=3) {
        let mut r = rng(seed);
        let x = common::random_exact(n, false, &mut r);
        let (sa, sb) = (Scalar::ratio(a, d), Scalar::ratio(b, d));
        for kind in [ActionKind::Metric, ActionKind::Measure] {
            let twice = scalar_action(kind, &sa, &scalar_action(kind, &sb, &x).unwrap()).unwrap();
            let once = scalar_action(kind, &(sa.clone() * sb.clone()), &x).unwrap();
            prop_assert!(equivalent(&twice, &once));
        }
        let one = scalar_action(ActionKind::Metric, &Scalar::int(1), &x).unwrap();
        prop_assert!(equivalent(&one, &x));
    }

    #[test]
    fn dmm_total_weight_is_a_mass_power(seed in any::<u64>(), n in 1usize..=4, m in 2usize..=4) {
        let mut r = rng(seed);
        let x = common::random_exact(n, false, &mut r);
        let nu = distance_matrix_measure(&x, m, DEFAULT_ENUM_LIMIT).unwrap();
        prop_assert_eq!(nu.total_weight(x.mode()), x.total_mass().powi(m as u32));
    }

    #[test]
    fn measure_scaling_and_metric_contraction(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let x = common::random_exact(n, true, &mut r);
        let opts = CheckOptions::default();
        let heavier = scalar_action(ActionKind::Measure, &Scalar::int(2), &x).unwrap();
        prop_assert!(le_gen(&x, &heavier, opts).unwrap().verdict);
        let shrunk = scalar_action(ActionKind::Metric, &Scalar::ratio(1, 2), &x).unwrap();
        prop_assert!(le_gen(&shrunk, &x, opts).unwrap().verdict);
        prop_assert!(le_metric(&shrunk, &x, opts).unwrap().verdict);
    }

    #[test]
    fn orders_are_compatible_with_scaling(seed in any::<u64>(), n in 2usize..=5, a in 1i64..=3) {
        let mut r = rng(seed);
        let y = common::random_exact(n, false, &mut r);
        let keep: Vec<usize> = (0..n).filter(|_| r.random_bool(0.6)).collect();
        let x = y.restrict(&keep);
        let opts = CheckOptions::default();
        prop_assert!(le_measure(&x, &y, opts).unwrap().verdict);
        for kind in [ActionKind::Metric, ActionKind::Measure] {
            let s = Scalar::int(a);
            let (sx, sy) = (scalar_action(kind, &s, &x).unwrap(), scalar_action(kind, &s, &y).unwrap());
            prop_assert!(le_measure(&sx, &sy, opts).unwrap().verdict);
            prop_assert!(le_gen(&sx, &sy, opts).unwrap().verdict);
        }
    }

    #[test]
    fn eurandom_is_relabel_invariant(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let mut r = rng(seed);
        let x = common::random_exact(n, true, &mut r);
        let y = common::random_exact(m, true, &mut r);
        let cfg = EurandomConfig { restarts: 8, ..EurandomConfig::default() };
        let d = eurandom(&x, &y, 1.0, &cfg).unwrap();
        let e = eurandom(&shuffled(&x, &mut r), &shuffled(&y, &mut r), 1.0, &cfg).unwrap();
        if d.certified && e.certified {
            prop_assert!((d.upper_bound - e.upper_bound).abs() <= 2e-6);
        }
        let back = eurandom(&y, &x, 1.0, &cfg).unwrap();
        prop_assert!((d.upper_bound - back.upper_bound).abs() <= 1e-12);
    }

    #[test]
    fn certified_eurandom_satisfies_triangle_inequality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sp: Vec<FiniteMmSpace> =
            (0..3).map(|_| { let k = r.random_range(1..=3); common::random_exact(k, true, &mut r) }).collect();
        let cfg = EurandomConfig { restarts: 8, ..EurandomConfig::default() };
        let d = |a: usize, b: usize| eurandom(&sp[a], &sp[b], 1.0, &cfg).unwrap();
        let (xy, yz, xz) = (d(0, 1), d(1, 2), d(0, 2));
        if xy.certified && yz.certified && xz.certified {
            prop_assert!(xz.upper_bound <= xy.upper_bound + yz.upper_bound + 2e-6);
        }
    }

    #[test]
    fn strassen_dominance_is_antisymmetric(
        wa in proptest::collection::vec(0i64..=3, 4),
        wb in proptest::collection::vec(0i64..=3, 4),
    ) {
        let (ta, tb): (i64, i64) = (wa.iter().sum(), wb.iter().sum());
        prop_assume!(ta > 0 && tb > 0);
        // both laws normalized to total mass ta * tb
        let law = |w: &[i64], scale: i64| {
            DiscreteLaw::real(w.iter().enumerate().map(|(v, &k)| (Scalar::int(v as i64), Scalar::int(k * scale))).collect())
                .unwrap()
        };
        let (a, b) = (law(&wa, tb), law(&wb, ta));
        let ab = strassen_check(&a, &b, AtomOrder::Real, 0.0).unwrap().dominated;
        let ba = strassen_check(&b, &a, AtomOrder::Real, 0.0).unwrap().dominated;
        if ab && ba {
            let scaled_a: Vec<i64> = wa.iter().map(|k| k * tb).collect();
            let scaled_b: Vec<i64> = wb.iter().map(|k| k * ta).collect();
            prop_assert_eq!(scaled_a, scaled_b);
        }
        // first-order dominance on the line is a CDF comparison
        let cdf = |w: &[i64], s: i64| w.iter().scan(0, |acc, k| { *acc += k * s; Some(*acc) }).collect::<Vec<_>>();
        let (fa, fb) = (cdf(&wa, tb), cdf(&wb, ta));
        prop_assert_eq!(ab, fa.iter().zip(&fb).all(|(p, q)| p >= q));
    }

    #[test]
    fn simulators_are_deterministic(seed in any::<u64>(), n in 2usize..=6) {
        let cfg = SimConfig { seed, n, t: Some(1.5), p: vec![0.8, 0.4], ..SimConfig::default() };
        type Sim = fn(&SimConfig) -> mmorder::Result<mmorder::genealogy::SimOutput>;
        let sims: [Sim; 4] = [simulate_moran, simulate_coupled_coalescent_trees, simulate_er_family, simulate_coupled_gw];
        for sim in sims {
            let (a, b) = (sim(&cfg).unwrap(), sim(&cfg).unwrap());
            prop_assert_eq!(&a.spaces, &b.spaces);
            prop_assert_eq!(&a.meta.raw, &b.meta.raw);
        }
    }

    #[test]
    fn moran_output_invariants(seed in any::<u64>(), n in 2usize..=7, t in 0.1f64..3.0) {
        let out = simulate_moran(&SimConfig { seed, n, t: Some(t), ..SimConfig::default() }).unwrap();
        let s = &out.spaces[0];
        prop_assert!(s.is_ultrametric());
        prop_assert!((s.total_mass().to_f64() - 1.0).abs() <= 1e-12);
        prop_assert!(s.dist_f64().iter().all(|&d| d <= 2.0 * t + 1e-12));
    }

    #[test]
    fn coalescent_fast_tree_lies_below(seed in any::<u64>(), n in 2usize..=6, g in 0.5f64..2.0, g2 in 0.0f64..2.0) {
        let out = simulate_coupled_coalescent_trees(&SimConfig { seed, n, gamma: g, gamma_prime: g2, ..SimConfig::default() })
            .unwrap();
        let (slow, fast) = (&out.spaces[0], &out.spaces[1]);
        prop_assert!(slow.is_ultrametric() && fast.is_ultrametric());
        prop_assert!(le_metric(fast, slow, CheckOptions::with_tol(1e-9)).unwrap().verdict);
    }
}

/// On the exhaustive grid, measure-order with equal mass and metric-order
/// with equal two-point distance laws both collapse to equivalence.
#[test]
fn order_antisymmetry_on_small_grid() {
    let spaces = common::small_grid_spaces();
    let opts = CheckOptions::default();
    let nu2: Vec<_> = spaces
        .iter()
        .map(|s| distance_matrix_measure(s, 2, DEFAULT_ENUM_LIMIT).unwrap())
        .collect();
    let mut checked = (0, 0);
    for (i, x) in spaces.iter().enumerate() {
        for (j, y) in spaces.iter().enumerate() {
            if x.total_mass() != y.total_mass() {
                continue;
            }
            if le_measure(x, y, opts).unwrap().verdict {
                assert!(equivalent(x, y), "measure: {i} vs {j}");
                checked.0 += 1;
            }
            if nu2[i] == nu2[j] && le_metric(x, y, opts).unwrap().verdict {
                assert!(equivalent(x, y), "metric: {i} vs {j}");
                checked.1 += 1;
            }
        }
    }
    assert!(checked.0 >= spaces.len() && checked.1 >= spaces.len());
}
