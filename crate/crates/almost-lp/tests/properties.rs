//! Property-based invariants of the functional calculus, driven by
//! proptest-generated finite spaces, functions, and tails.

use proptest::prelude::*;

use almost_lp::approx::{simple_ladder, truncate_to_lp};
use almost_lp::convergence::{implication_matrix, FnSequence, DEFAULT_TOL};
use almost_lp::functionals::{
    alpha_monotone_in_p, alpha_norm, alpha_norm_variational_identity, alpha_seminorm_on,
    estimate_chain_check, frechet_mu, lambda_p_member, Membership,
};
use almost_lp::{MeasurableFn, MeasurableSet, MeasureSpace, TailFamily, ValueFamily};

const TOL: f64 = 1e-10;
/// Relative slack absorbing f64 round-off in exact identities.
const SLACK: f64 = 1e-9;

fn space_strategy(max_cells: usize) -> impl Strategy<Value = MeasureSpace> {
    prop::collection::vec(0.05f64..2.0, 1..=max_cells)
        .prop_map(|w| MeasureSpace::finite(&w).expect("valid weights"))
}

/// Cell values spanning several magnitudes on both sides of the |f| = 1 kink.
fn values_strategy(cells: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![
            -3.0f64..3.0,
            (-3.0f64..3.0).prop_map(|e| 10f64.powf(e)),
            (-3.0f64..3.0).prop_map(|e| -(10f64.powf(e))),
            Just(0.0),
        ],
        cells..=cells,
    )
}

fn pair_strategy(max_cells: usize) -> impl Strategy<Value = (MeasureSpace, MeasurableFn)> {
    space_strategy(max_cells).prop_flat_map(|space| {
        let n = space.cells.len();
        values_strategy(n).prop_map(move |v| (space.clone(), MeasurableFn::dense(&v)))
    })
}

fn p_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), 1.0f64..4.0]
}

proptest! {
    // ‖f + g‖ ≤ ‖f‖ + ‖g‖ and ‖λf‖ ≤ ‖f‖ for |λ| ≤ 1 (F-norm axioms)
    #[test]
    fn fnorm_subadditive_and_monotone(
        (space, f) in pair_strategy(8),
        p in p_strategy(),
        lambda in -1.0f64..1.0,
        gv in values_strategy(8),
    ) {
        let g = MeasurableFn::dense(&gv[..space.cells.len()]);
        let nf = alpha_norm(&space, &f, p, TOL).unwrap().value_or_inf();
        let ng = alpha_norm(&space, &g, p, TOL).unwrap().value_or_inf();
        let sum = f.sub(&g.neg()).unwrap();
        let ns = alpha_norm(&space, &sum, p, TOL).unwrap().value_or_inf();
        prop_assert!(ns <= nf + ng + SLACK * (1.0 + nf + ng));
        let nl = alpha_norm(&space, &f.scale(lambda), p, TOL).unwrap().value_or_inf();
        prop_assert!(nl <= nf + SLACK * (1.0 + nf));
        // symmetry under negation is exact
        let nn = alpha_norm(&space, &f.neg(), p, TOL).unwrap().value_or_inf();
        prop_assert_eq!(nn, nf);
    }

    // scalar continuity: ‖2^-k f‖ decreases to 0
    #[test]
    fn fnorm_scalar_continuity((space, f) in pair_strategy(6), p in p_strategy()) {
        let mut prev = f64::INFINITY;
        let mut last = f64::INFINITY;
        for k in 1..=40 {
            let n = alpha_norm(&space, &f.scale(2f64.powi(-k)), p, TOL)
                .unwrap()
                .value_or_inf();
            prop_assert!(n <= prev + SLACK * (1.0 + prev.min(1e300)));
            prev = n;
            last = n;
        }
        prop_assert!(last < 1e-6);
    }

    // ‖f‖_{α_p}^p = min_B [∫_B |f|^p + μ(B^c)], attained at {|f| ≤ 1}
    #[test]
    fn variational_identity((space, f) in pair_strategy(8), p in p_strategy()) {
        let report = alpha_norm_variational_identity(&space, &f, p, TOL).unwrap();
        prop_assert!(report.identity_holds, "{report:?}");
        prop_assert!(report.canonical_minimizer_optimal, "{report:?}");
    }

    // ‖f‖_{α_q}^q ≤ ‖f‖_{α_p}^p for 1 ≤ p ≤ q (min(|f|,1) ≤ 1)
    #[test]
    fn alpha_monotone((space, f) in pair_strategy(8), p in 1.0f64..3.0, dq in 0.0f64..2.0) {
        let report = alpha_monotone_in_p(&space, &f, p, p + dq, TOL).unwrap();
        prop_assert!(report.holds, "{report:?}");
    }

    // both displayed seminorm/Fréchet/F-norm estimates
    #[test]
    fn estimate_chain(
        (space, f) in pair_strategy(10),
        p in p_strategy(),
        mask in any::<u32>(),
        delta0 in 0.05f64..1.0,
    ) {
        let ids = (0..space.cells.len()).filter(|i| mask >> i & 1 == 1);
        let set = MeasurableSet::of_cells(ids);
        let report = estimate_chain_check(&space, &f, p, &set, delta0, TOL).unwrap();
        prop_assert!(report.first_holds && report.second_holds, "{report:?}");
    }

    // the restricted seminorm never exceeds the full F-norm
    #[test]
    fn seminorm_below_norm((space, f) in pair_strategy(8), p in p_strategy(), mask in any::<u32>()) {
        let ids = (0..space.cells.len()).filter(|i| mask >> i & 1 == 1);
        let set = MeasurableSet::of_cells(ids);
        let semi = alpha_seminorm_on(&space, &f, p, &set, TOL).unwrap();
        let full = alpha_norm(&space, &f, p, TOL).unwrap().value_or_inf();
        prop_assert!(semi <= full + SLACK * (1.0 + full));
    }

    // 0 ≤ ‖f‖_μ ≤ min(1, total measure + anything): capped Fréchet range
    #[test]
    fn frechet_range((space, f) in pair_strategy(8)) {
        let mu = frechet_mu(&space, &f, TOL).unwrap();
        prop_assert!((0.0..=1.0).contains(&mu));
        // zero function has Fréchet value 0
        let z = frechet_mu(&space, &MeasurableFn::zero(), TOL).unwrap();
        prop_assert_eq!(z, 0.0);
    }

    // on geometric-mass tails every value family is a member; the L_p flag
    // matches the analytic ratio test
    #[test]
    fn geometric_tail_membership(r in 0.1f64..0.9, b in 0.1f64..10.0, q in 0.5f64..3.0, p in p_strategy()) {
        let space = MeasureSpace::new(vec![], TailFamily::Geometric { a: 1.0, r, start: 1 }).unwrap();
        let f = MeasurableFn::zero().with_tail(ValueFamily::Geometric { b, q }, 1);
        let report = lambda_p_member(&space, &f, p, &[0.5, 0.1, 0.01], TOL).unwrap();
        prop_assert_eq!(report.verdict, Membership::Member);
        let crit = r * q.powf(p);
        // skip the razor-edge band where fp rounding decides
        if (crit - 1.0).abs() > 1e-6 {
            prop_assert_eq!(report.in_lp, crit < 1.0, "r={} q={} p={}", r, q, p);
        }
        for (delta, witness) in &report.witnesses {
            let m = witness.measure(&space, TOL).unwrap().value_or_inf();
            prop_assert!(m < *delta);
        }
    }

    // truncation certificates: excised measure within budget, α-distance
    // within ε, remainder in L_p
    #[test]
    fn truncation_certificate(r in 0.2f64..0.8, q in 1.1f64..2.5, p in p_strategy(), eps in 0.02f64..0.5) {
        let space = MeasureSpace::new(vec![], TailFamily::Geometric { a: 1.0, r, start: 1 }).unwrap();
        let f = MeasurableFn::zero().with_tail(ValueFamily::Geometric { b: 1.0, q }, 1);
        let cert = truncate_to_lp(&space, &f, p, eps, TOL).unwrap();
        prop_assert!(cert.mu_excised < eps.powf(p) + SLACK);
        prop_assert!(cert.alpha_dist <= eps + SLACK);
        prop_assert!(cert.lp_pow_g.is_finite());
    }

    // ladder terms are dominated by f and preserve its sign cellwise
    #[test]
    fn ladder_domination((space, f) in pair_strategy(8), k in 1u32..8) {
        for s in simple_ladder(&f, k).unwrap() {
            for c in &space.cells {
                let (fv, sv) = (f.value(c.id), s.value(c.id));
                prop_assert!(sv.abs() <= fv.abs());
                prop_assert!(fv * sv >= 0.0);
            }
        }
    }

    // function JSON wire form round-trips through serde
    #[test]
    fn function_serde_round_trip((_space, f) in pair_strategy(8)) {
        let json = serde_json::to_string(&f).unwrap();
        let back: MeasurableFn = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // the one-way implication lattice holds on random damped sequences;
    // perturbation amplitudes are bounded so convergence resolves within
    // the 64-term observation horizon at the finest δ of the grid
    #[test]
    fn implication_lattice_random_sequences(
        (space, f) in pair_strategy(5),
        gv in prop::collection::vec(-10.0f64..10.0, 5),
        damp in prop_oneof![Just(0.5f64), Just(0.25), Just(0.8)],
    ) {
        let g = MeasurableFn::dense(&gv[..space.cells.len()]);
        let terms: Vec<MeasurableFn> = (1..=64)
            .map(|n| f.sub(&g.scale(-damp.powi(n))).unwrap())
            .collect();
        let seq = FnSequence::explicit(space, terms, Some(f)).unwrap();
        let matrix = implication_matrix(&seq, 1.0, DEFAULT_TOL).unwrap();
        prop_assert!(matrix.consistent);
    }
}
