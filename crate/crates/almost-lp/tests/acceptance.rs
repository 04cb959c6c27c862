//! End-to-end acceptance suite: one test per criterion, each printing a
//! single pass/fail line (run with `--nocapture` to see them inline).
//!
//! Tolerances and runtime budgets are pinned in the constants next to each
//! criterion; the random suites use fixed seeds so every run checks the
//! same instances.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use almost_lp::approx::{mollify, simple_ladder, truncate_to_lp, GridBox};
use almost_lp::convergence::{
    check_ae, check_alpha, check_in_measure, check_local_in_measure, check_lp, default_delta_grid,
    implication_matrix, vitali_alpha, vitali_classic, vitali_lambda, FnSequence, Verdict,
    DEFAULT_TOL,
};
use almost_lp::functionals::{
    ac_modulus, alpha_norm_variational_identity, estimate_chain_check, fnorm_axioms_check,
    lambda_p_member, random_fn, Membership,
};
use almost_lp::gallery::{run_entry, GalleryParams};
use almost_lp::measure::TailSegment;
use almost_lp::{
    Extended, MeasurableFn, MeasurableSet, MeasureSpace, TailFamily, ValueFamily,
};

const TOL: f64 = 1e-10;
const REL: f64 = 1e-12;

fn conclude(number: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {number} ({name}): {}",
        if ok { "pass" } else { "fail" }
    );
    assert!(ok, "criterion {number} ({name}) failed: {detail}");
}

fn within(start: Instant, budget: Duration) -> bool {
    start.elapsed() <= budget
}

/// Random finite divisible space with `cells` cells, weights in (0.05, 2).
fn random_space(cells: usize, rng: &mut ChaCha8Rng) -> MeasureSpace {
    let weights: Vec<f64> = (0..cells).map(|_| 0.05 + 1.95 * rng.random::<f64>()).collect();
    MeasureSpace::finite(&weights).expect("valid random space")
}

// 1. unbounded_ball reproduces ‖f_n‖ = ‖(1/n)f_n‖ = ε/2 to 1e-12 relative
//    error for ε ∈ {0.5, 1, 1.9}, p ∈ {1, 2, 3}, d ∈ {1, 2}, n ≤ 10^4.
#[test]
fn criterion_1_gallery_exactness() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for eps in [0.5, 1.0, 1.9] {
        for p in [1.0, 2.0, 3.0] {
            for d in [1usize, 2] {
                let params = GalleryParams {
                    p,
                    eps,
                    d,
                    n: 10_000,
                    ..GalleryParams::default()
                };
                let report = run_entry("unbounded_ball", &params).expect("entry runs");
                let exact = report.checks.iter().all(|c| c.pass && c.rel_err <= REL);
                if !(report.passed && exact) {
                    ok = false;
                    detail = format!("eps={eps} p={p} d={d}: {report:?}");
                }
            }
        }
    }
    let in_time = within(start, Duration::from_secs(1));
    if !in_time {
        detail = format!("runtime {:?} exceeds 1 s", start.elapsed());
    }
    conclude(1, "gallery exactness", ok && in_time, &detail);
}

// 2. Non-convexity witness: p = 1, ε = 1, R = 2 gives minimal K = 8 with
//    ‖g_8‖_{α_1} = 2.25 and every f_n inside B_1, all to 1e-12.
#[test]
fn criterion_2_nonconvexity_witness() {
    let start = Instant::now();
    let report = run_entry("nonconvex", &GalleryParams::default()).expect("entry runs");
    let k_is_8 = report.notes.iter().any(|n| n.contains("minimal K = 8"));
    let g8 = report
        .checks
        .iter()
        .find(|c| c.label == "alpha(g_8)")
        .expect("g_8 check present");
    let g8_exact = (g8.computed - 2.25).abs() <= REL * 2.25;
    let balls = report
        .checks
        .iter()
        .filter(|c| c.label.starts_with("alpha(f_"))
        .all(|c| c.pass && (c.computed - 0.5).abs() <= REL);
    let ok = report.passed && k_is_8 && g8_exact && balls;
    let in_time = within(start, Duration::from_secs(1));
    conclude(
        2,
        "non-convexity witness",
        ok && in_time,
        &format!("report: {report:?}, elapsed {:?}", start.elapsed()),
    );
}

// 3. F-norm axioms: 1000 random (f, g, λ) triples on 16-cell spaces for
//    p ∈ {1, 1.5, 2, 3}, zero violations, under 10 s.
#[test]
fn criterion_3_fnorm_axioms() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ok = true;
    let mut detail = String::new();
    for p in [1.0, 1.5, 2.0, 3.0] {
        let space = random_space(16, &mut rng);
        let report = fnorm_axioms_check(&space, p, 1000, TOL, &mut rng).expect("suite runs");
        if !report.passed() {
            ok = false;
            detail = format!("p={p}: {:?}", report.violations);
        }
    }
    let in_time = within(start, Duration::from_secs(10));
    if !in_time {
        detail = format!("runtime {:?} exceeds 10 s", start.elapsed());
    }
    conclude(3, "F-norm axiom suite", ok && in_time, &detail);
}

// 4. Variational identity: 200 random instances on ≤ 10 cells, brute-force
//    min over all subsets equals ‖f‖_{α_p}^p to 1e-12 with the canonical
//    minimizer {|f| ≤ 1} always optimal, under 30 s.
#[test]
fn criterion_4_variational_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ok = true;
    let mut detail = String::new();
    for trial in 0..200 {
        let cells = 1 + rng.random_range(0..10);
        let space = random_space(cells, &mut rng);
        let f = random_fn(&space, &mut rng);
        let p = [1.0, 1.5, 2.0, 3.0][trial % 4];
        let report = alpha_norm_variational_identity(&space, &f, p, TOL).expect("brute force");
        if !(report.identity_holds && report.canonical_minimizer_optimal) {
            ok = false;
            detail = format!("trial {trial}: {report:?}");
        }
    }
    let in_time = within(start, Duration::from_secs(30));
    if !in_time {
        detail = format!("runtime {:?} exceeds 30 s", start.elapsed());
    }
    conclude(4, "variational-identity oracle", ok && in_time, &detail);
}

// 5. Estimate chain: 1000 random instances satisfy both displayed
//    inequalities with zero violations.
#[test]
fn criterion_5_estimate_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = true;
    let mut detail = String::new();
    for trial in 0..1000 {
        let cells = 1 + rng.random_range(0..12);
        let space = random_space(cells, &mut rng);
        let f = random_fn(&space, &mut rng);
        let p = [1.0, 1.5, 2.0, 3.0][trial % 4];
        let subset: Vec<usize> = (0..cells).filter(|_| rng.random::<bool>()).collect();
        let set = MeasurableSet::of_cells(subset);
        let delta0 = 0.05 + 0.95 * rng.random::<f64>();
        let report =
            estimate_chain_check(&space, &f, p, &set, delta0, TOL).expect("chain computes");
        if !(report.first_holds && report.second_holds) {
            ok = false;
            detail = format!("trial {trial}: {report:?}");
        }
    }
    conclude(5, "estimate chain", ok, &detail);
}

/// Random explicit sequence on a finite space: either converging to its
/// base function (geometrically damped perturbation) or alternating.
fn random_sequence(rng: &mut ChaCha8Rng) -> FnSequence {
    let cells = 2 + rng.random_range(0..5);
    let space = random_space(cells, rng);
    let f = random_fn(&space, rng);
    let g = random_fn(&space, rng);
    let converging = rng.random::<bool>();
    let terms: Vec<MeasurableFn> = (1..=32)
        .map(|n| {
            let c = if converging {
                2f64.powi(-n)
            } else {
                // alternating: no convergence in any mode
                if n % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            };
            f.sub(&g.scale(-c)).expect("finite sum")
        })
        .collect();
    FnSequence::explicit(space, terms, Some(f)).expect("valid sequence")
}

// 6. Vitali triptych: the three canonical sequences reproduce the derived
//    leg patterns in all three theorem variants, and biconditional
//    consistency never fires over 200 random finite-space instances,
//    under 60 s.
#[test]
fn criterion_6_vitali_triptych() {
    let start = Instant::now();
    let p = 1.0;
    let mut ok = true;
    let mut detail = String::new();

    let nchi = FnSequence::n_chi_shrinking(64);
    let chi = FnSequence::chi_shrinking(64);
    let boxes = FnSequence::escaping_box(64);

    // classic legs: [in_measure, tightness, uniform integrability]
    let c = vitali_classic(&nchi, p, DEFAULT_TOL).unwrap();
    ok &= c.legs[0].verdict == Verdict::Holds
        && c.legs[2].verdict == Verdict::Fails
        && c.conclusion.verdict == Verdict::Fails
        && c.consistent;
    let c = vitali_classic(&chi, p, DEFAULT_TOL).unwrap();
    ok &= c.legs.iter().all(|l| l.verdict == Verdict::Holds)
        && c.conclusion.verdict == Verdict::Holds
        && c.consistent;
    let c = vitali_classic(&boxes, p, DEFAULT_TOL).unwrap();
    ok &= c.legs[0].verdict == Verdict::Fails
        && c.conclusion.verdict == Verdict::Fails
        && c.consistent;

    // alpha legs: [alpha_p, uniform integrability]
    let a = vitali_alpha(&nchi, p, DEFAULT_TOL).unwrap();
    ok &= a.legs[0].verdict == Verdict::Holds
        && a.legs[1].verdict == Verdict::Fails
        && a.conclusion.verdict == Verdict::Fails
        && a.consistent;
    let a = vitali_alpha(&chi, p, DEFAULT_TOL).unwrap();
    ok &= a.legs.iter().all(|l| l.verdict == Verdict::Holds)
        && a.conclusion.verdict == Verdict::Holds
        && a.consistent;
    let a = vitali_alpha(&boxes, p, DEFAULT_TOL).unwrap();
    ok &= a.legs[0].verdict == Verdict::Fails && a.consistent;

    // lambda legs: [local_in_measure, alpha-tightness]
    let l = vitali_lambda(&nchi, p, DEFAULT_TOL).unwrap();
    ok &= l.legs[0].verdict == Verdict::Holds
        && l.conclusion.verdict == Verdict::Holds
        && l.consistent;
    let l = vitali_lambda(&chi, p, DEFAULT_TOL).unwrap();
    ok &= l.legs.iter().all(|v| v.verdict == Verdict::Holds)
        && l.conclusion.verdict == Verdict::Holds
        && l.consistent;
    let l = vitali_lambda(&boxes, p, DEFAULT_TOL).unwrap();
    ok &= l.legs[0].verdict == Verdict::Holds
        && l.legs[1].verdict == Verdict::Fails
        && l.conclusion.verdict == Verdict::Fails
        && l.consistent;

    if !ok {
        detail = "canonical leg pattern mismatch".into();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..200 {
        let seq = random_sequence(&mut rng);
        for report in [
            vitali_classic(&seq, p, DEFAULT_TOL).unwrap(),
            vitali_alpha(&seq, p, DEFAULT_TOL).unwrap(),
            vitali_lambda(&seq, p, DEFAULT_TOL).unwrap(),
        ] {
            if !report.consistent {
                ok = false;
                detail = format!("trial {trial} variant {}: {report:?}", report.variant);
            }
        }
    }
    let in_time = within(start, Duration::from_secs(60));
    if !in_time {
        detail = format!("runtime {:?} exceeds 60 s", start.elapsed());
    }
    conclude(6, "Vitali triptych", ok && in_time, &detail);
}

// 7. Implication lattice Lp ⇒ almost_Lp ⇒ alpha_p ⇒ in_measure ⇒
//    local_in_measure never violated, and on finite-measure spaces the
//    last three verdicts coincide (no Holds/Fails mix).
#[test]
fn criterion_7_implication_lattice() {
    let mut ok = true;
    let mut detail = String::new();
    let p = 1.0;
    let grid = default_delta_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let mut sequences = vec![
        FnSequence::n_chi_shrinking(64),
        FnSequence::chi_shrinking(64),
        FnSequence::escaping_box(64),
    ];
    for _ in 0..100 {
        sequences.push(random_sequence(&mut rng));
    }

    for (i, seq) in sequences.iter().enumerate() {
        match implication_matrix(seq, p, DEFAULT_TOL) {
            Ok(matrix) => {
                if !matrix.consistent {
                    ok = false;
                    detail = format!("sequence {i}: inconsistent matrix");
                }
            }
            Err(e) => {
                ok = false;
                detail = format!("sequence {i}: {e}");
            }
        }
        if seq.space.is_finite_measure() {
            let three = [
                check_alpha(seq, p, DEFAULT_TOL).unwrap().verdict,
                check_in_measure(seq, &grid, DEFAULT_TOL).unwrap().verdict,
                check_local_in_measure(seq, None, &grid, DEFAULT_TOL)
                    .unwrap()
                    .verdict,
            ];
            let holds = three.iter().any(|&v| v == Verdict::Holds);
            let fails = three.iter().any(|&v| v == Verdict::Fails);
            if holds && fails {
                ok = false;
                detail = format!("sequence {i}: finite-measure modes diverge: {three:?}");
            }
        }
    }
    conclude(7, "implication lattice", ok, &detail);
}

// 8. Membership dichotomy: the 2^{-n}-weight / 2^{n/p}-value example is in
//    Λ_p but not L_p with ω(δ) bounded away from 0; one_over_x matches for
//    p ∈ {1.5, 2, 3}; truncation certificates hold exactly.
#[test]
fn criterion_8_membership_dichotomy() {
    let mut ok = true;
    let mut detail = String::new();
    let space = MeasureSpace::new(
        vec![],
        TailFamily::Geometric {
            a: 1.0,
            r: 0.5,
            start: 1,
        },
    )
    .unwrap();
    for p in [1.0, 1.5, 2.0, 3.0] {
        // |f|(n) = 2^{n/p} so that |f|^p exactly cancels the weight decay;
        // nudge q up by ulps so rounding cannot land the critical product
        // 0.5·q^p strictly below 1
        let mut q = 2f64.powf(1.0 / p);
        while 0.5 * q.powf(p) < 1.0 {
            q = q.next_up();
        }
        let f = MeasurableFn::zero().with_tail(ValueFamily::Geometric { b: 1.0, q }, 1);
        let report = lambda_p_member(&space, &f, p, &[0.5, 0.1, 0.01], TOL).unwrap();
        if !(report.verdict == Membership::Member && !report.in_lp) {
            ok = false;
            detail = format!("p={p}: {:?} in_lp={}", report.verdict, report.in_lp);
        }
        // every witness respects its measure budget
        for (delta, witness) in &report.witnesses {
            let mu = witness.measure(&space, TOL).unwrap().value_or_inf();
            if mu >= *delta {
                ok = false;
                detail = format!("p={p}: witness measure {mu} >= {delta}");
            }
        }
        // ω(δ) stays away from 0 (here the sup is infinite at every δ)
        let curve = ac_modulus(&space, &f, p, &[0.5, 0.1, 0.01], TOL).unwrap();
        if !curve.samples.iter().all(|s| s.omega == Extended::Infinite) {
            ok = false;
            detail = format!("p={p}: ac modulus {curve:?}");
        }
    }
    for p in [1.5, 2.0, 3.0] {
        let params = GalleryParams {
            p,
            ..GalleryParams::default()
        };
        let report = run_entry("one_over_x", &params).expect("entry runs");
        if !report.passed {
            ok = false;
            detail = format!("one_over_x p={p}: {report:?}");
        }
    }
    // exact truncation certificate at p = 1, eps = 0.1: the witness is the
    // suffix from 8, of measure 2^-7, and the kept head integrates to 7
    let f = MeasurableFn::zero().with_tail(ValueFamily::Geometric { b: 1.0, q: 2.0 }, 1);
    let cert = truncate_to_lp(&space, &f, 1.0, 0.1, TOL).unwrap();
    if !((cert.mu_excised - 2f64.powi(-7)).abs() <= REL
        && cert.alpha_dist <= 2f64.powi(-7) + REL
        && (cert.lp_pow_g - 7.0).abs() <= 1e-9)
    {
        ok = false;
        detail = format!(
            "certificate: mu={} dist={} lp={}",
            cert.mu_excised, cert.alpha_dist, cert.lp_pow_g
        );
    }
    conclude(8, "membership dichotomy", ok, &detail);
}

// 9. Approximation certificates: ladder domination exact on all trials;
//    truncation within ε on 500 member trials; mollification of the 1D
//    jump within h for h ∈ {0.1, 0.05, 0.025} with order-1 decrease.
#[test]
fn criterion_9_approximation_certificates() {
    let mut ok = true;
    let mut detail = String::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // ladder domination |s_j| <= |f|, sign preserved
    for trial in 0..100 {
        let space = random_space(8, &mut rng);
        let f = random_fn(&space, &mut rng);
        for s in simple_ladder(&f, 6).unwrap() {
            for c in &space.cells {
                let (fv, sv) = (f.value(c.id), s.value(c.id));
                if sv.abs() > fv.abs() || fv * sv < 0.0 {
                    ok = false;
                    detail = format!("trial {trial}: ladder {sv} vs {fv}");
                }
            }
        }
    }

    // 500 member truncations within eps
    let eps = 0.1;
    for trial in 0..500 {
        let p = [1.0, 1.5, 2.0][trial % 3];
        let (space, f) = match trial % 3 {
            0 => {
                // finite space: already in L_p
                let space = random_space(1 + rng.random_range(0..8), &mut rng);
                let f = random_fn(&space, &mut rng);
                (space, f)
            }
            1 => {
                // geometric mass with (possibly) divergent growing values
                let space = MeasureSpace::new(
                    vec![],
                    TailFamily::Geometric {
                        a: 1.0,
                        r: 0.5,
                        start: 1,
                    },
                )
                .unwrap();
                let q = 1.2 + rng.random::<f64>();
                let f = MeasurableFn::zero()
                    .with_tail(ValueFamily::Geometric { b: 1.0, q }, 1);
                (space, f)
            }
            _ => {
                // summable power mass with growing values: divergent integral
                let space = MeasureSpace::new(
                    vec![],
                    TailFamily::Power {
                        c: 1.0,
                        s: 1.5,
                        start: 1,
                    },
                )
                .unwrap();
                let t = -(0.2 + 0.6 * rng.random::<f64>());
                let f = MeasurableFn::zero().with_tail(ValueFamily::Power { b: 1.0, t }, 1);
                (space, f)
            }
        };
        match truncate_to_lp(&space, &f, p, eps, TOL) {
            Ok(cert) => {
                if !(cert.alpha_dist < eps && cert.lp_pow_g.is_finite()) {
                    ok = false;
                    detail = format!(
                        "trial {trial}: dist {} lp {}",
                        cert.alpha_dist, cert.lp_pow_g
                    );
                }
            }
            Err(e) => {
                ok = false;
                detail = format!("trial {trial}: {e}");
            }
        }
    }

    // 1D jump mollification: ‖f − φ‖_{α_1} ≤ h with order-1 decrease
    let grid = GridBox::new(vec![(-2.0, 2.0)], vec![800]).unwrap();
    let values = grid.sample(|x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 });
    let mut last = f64::INFINITY;
    for h in [0.1, 0.05, 0.025] {
        let rep = mollify(&grid, &values, 1.0, h).unwrap();
        // order-1: halving h at least nearly halves the error
        if !(rep.alpha_dist <= h && rep.alpha_dist <= 0.65 * last) {
            ok = false;
            detail = format!("h={h}: dist {} (prev {last})", rep.alpha_dist);
        }
        last = rep.alpha_dist;
    }
    conclude(9, "approximation certificates", ok, &detail);
}

// The canonical sequences keep their a.e. / L_p / in-measure signatures
// when re-read from their JSON wire form (regression guard for the CLI).
#[test]
fn sequence_wire_form_round_trip() {
    let seq = FnSequence::from_json(r#"{"family": "n_chi_shrinking"}"#).unwrap();
    assert_eq!(check_lp(&seq, 1.0, DEFAULT_TOL).unwrap().verdict, Verdict::Fails);
    assert_eq!(check_ae(&seq, DEFAULT_TOL).unwrap().verdict, Verdict::Holds);
    let seq = FnSequence::from_json(r#"{"family": "escaping_box"}"#).unwrap();
    assert_eq!(
        check_in_measure(&seq, &default_delta_grid(), DEFAULT_TOL)
            .unwrap()
            .verdict,
        Verdict::Fails
    );
    // explicit wire form with a tail segment on the limit
    let json = r#"{
        "family": "explicit",
        "space": {"cells": [{"id": 0, "weight": 1.0}], "tail": {"kind": "none"}},
        "terms": [{"values": {"0": 1.0}}, {"values": {"0": 0.5}}],
        "limit": {"values": {"0": 0.0}}
    }"#;
    let seq = FnSequence::from_json(json).unwrap();
    assert_eq!(seq.n_max, 2);
    let _ = TailSegment {
        lo: 1,
        hi: None,
        family: ValueFamily::Zero,
        sign: 1,
    };
}
