//! Named examples and counterexamples of the Λ_p topology, each with its
//! closed-form expected values recomputed and verified at run time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AlpError, Result};
use crate::functionals::{alpha_norm, frechet_mu, lambda_p_member, Membership};
use crate::measure::{
    Cell, Extended, MeasurableFn, MeasureSpace, TailFamily, ValueFamily,
};

/// Parameters accepted by the gallery entries; each entry reads the
/// subset it declares and validates its domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GalleryParams {
    pub p: f64,
    pub eps: f64,
    pub r: f64,
    pub d: usize,
    pub n: u64,
    pub seed: u64,
    pub trials: usize,
}

impl Default for GalleryParams {
    fn default() -> Self {
        GalleryParams {
            p: 1.0,
            eps: 1.0,
            r: 2.0,
            d: 1,
            n: 100,
            seed: 0,
            trials: 100,
        }
    }
}

/// One computed-vs-expected comparison line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckLine {
    pub label: String,
    pub computed: f64,
    pub expected: f64,
    pub rel_err: f64,
    pub pass: bool,
}

fn check(label: impl Into<String>, computed: f64, expected: f64, rel_tol: f64) -> CheckLine {
    let scale = expected.abs().max(1.0);
    let rel_err = if computed == expected {
        0.0
    } else {
        (computed - expected).abs() / scale
    };
    CheckLine {
        label: label.into(),
        computed,
        expected,
        rel_err,
        pass: rel_err <= rel_tol,
    }
}

/// Gallery run report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GalleryReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<CheckLine>,
    pub notes: Vec<String>,
}

impl GalleryReport {
    fn finish(name: &str, checks: Vec<CheckLine>, notes: Vec<String>) -> GalleryReport {
        GalleryReport {
            name: name.to_string(),
            passed: checks.iter().all(|c| c.pass),
            checks,
            notes,
        }
    }
}

/// Catalog entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static str,
}

/// Stable-ordered catalog of the five entries.
pub fn list_entries() -> Vec<EntryInfo> {
    vec![
        EntryInfo {
            name: "unbounded_ball",
            summary: "f_n = n·χ on disjoint cubes of measure (eps/2)^p: the eps-ball \
                      is not topologically bounded (‖f_n‖ and ‖(1/n)f_n‖ both = eps/2)",
            params: "eps in (0,2), p >= 1, d in {1,2,3}, n >= 1",
        },
        EntryInfo {
            name: "nonconvex",
            summary: "averages g_K of ball elements escape every larger ball: \
                      minimal K with ‖g_K‖ > R witnesses non-convexity",
            params: "eps in (0,2), p >= 1, R > eps/2",
        },
        EntryInfo {
            name: "frechet_pathology",
            summary: "f(x) = x on the half-line: ‖(1/n)f‖_mu = 1 for every n, so the \
                      Frechet functional is not scalar-continuous",
            params: "n >= 1 (scalings 1..n checked)",
        },
        EntryInfo {
            name: "one_over_x",
            summary: "f(x) = 1/x on dyadic shells near zero plus the far field: in \
                      Lambda_p but not L_p for p > 1",
            params: "p > 1",
        },
        EntryInfo {
            name: "finite_collapse",
            summary: "on finite measure spaces every measurable function is a member: \
                      Lambda_p collapses to L_0",
            params: "p >= 1, seed, trials",
        },
    ]
}

const REL_TOL: f64 = 1e-12;
const TOL: f64 = 1e-10;

/// Run a gallery entry by name.
pub fn run_entry(name: &str, params: &GalleryParams) -> Result<GalleryReport> {
    match name {
        "unbounded_ball" => unbounded_ball(params),
        "nonconvex" => nonconvex(params),
        "frechet_pathology" => frechet_pathology(params),
        "one_over_x" => one_over_x(params),
        "finite_collapse" => finite_collapse(params),
        other => Err(AlpError::UnknownEntry(other.to_string())),
    }
}

/// The unit cube space of the §7 constructions: one divisible cell of
/// measure (eps/2)^p per cube (the cube side (eps/2)^{p/d} only changes
/// the geometry, never the measure).
fn cube_space(count: usize, eps: f64, p: f64) -> MeasureSpace {
    let w = (eps / 2.0).powf(p);
    let cells = (0..count)
        .map(|id| Cell {
            id,
            weight: w,
            divisible: true,
        })
        .collect();
    MeasureSpace::new(cells, TailFamily::None).expect("valid cube space")
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(AlpError::ParamOutOfDomain(msg.to_string()))
    }
}

/// ‖f_n‖_{α_p} = ‖(1/n)f_n‖_{α_p} = eps/2 for every n: the ball B_eps
/// contains functions no scaling can shrink.
fn unbounded_ball(params: &GalleryParams) -> Result<GalleryReport> {
    let (eps, p, d) = (params.eps, params.p, params.d);
    require(eps > 0.0 && eps < 2.0, "eps must lie in (0, 2)")?;
    require(p >= 1.0, "p must be >= 1")?;
    require((1..=3).contains(&d), "d must be 1, 2, or 3")?;
    require(params.n >= 1, "n must be >= 1")?;
    let space = cube_space(1, eps, p);
    let expected = eps / 2.0;
    let mut checks = Vec::new();
    // sample n log-uniformly up to the requested bound
    let mut ns = vec![1u64, 2, 3];
    let mut k = 10u64;
    while k <= params.n {
        ns.push(k);
        k *= 10;
    }
    ns.push(params.n);
    ns.dedup();
    for &n in &ns {
        let f_n = MeasurableFn::dense(&[n as f64]);
        let a = alpha_norm(&space, &f_n, p, TOL)?.value_or_inf();
        checks.push(check(format!("alpha(f_{n})"), a, expected, REL_TOL));
        let scaled = f_n.scale(1.0 / n as f64);
        let b = alpha_norm(&space, &scaled, p, TOL)?.value_or_inf();
        checks.push(check(format!("alpha(f_{n}/{n})"), b, expected, REL_TOL));
    }
    let notes = vec![format!(
        "cube side (eps/2)^(p/d) = {}, measure (eps/2)^p = {}",
        (eps / 2.0).powf(p / d as f64),
        (eps / 2.0).powf(p)
    )];
    Ok(GalleryReport::finish("unbounded_ball", checks, notes))
}

/// Minimal K whose average g_K = (1/K)·sum f_n escapes the R-ball even
/// though every f_n sits inside B_eps.
fn nonconvex(params: &GalleryParams) -> Result<GalleryReport> {
    let (eps, p, r) = (params.eps, params.p, params.r);
    require(eps > 0.0 && eps < 2.0, "eps must lie in (0, 2)")?;
    require(p >= 1.0, "p must be >= 1")?;
    require(r > eps / 2.0, "R must exceed eps/2")?;
    let norm_pow = |k: usize| -> f64 {
        // (eps/2)^p (1/K^p) sum_{n=1}^{K} n^p
        let s: f64 = (1..=k).map(|n| (n as f64).powf(p)).sum();
        (eps / 2.0).powf(p) * s / (k as f64).powf(p)
    };
    let mut k = 1usize;
    while norm_pow(k) <= r.powf(p) {
        k += 1;
        if k > 1_000_000 {
            return Err(AlpError::ParamOutOfDomain(
                "no K <= 10^6 escapes the R-ball".into(),
            ));
        }
    }
    let space = cube_space(k, eps, p);
    let mut checks = Vec::new();
    // each f_n stays inside B_eps
    for n in 1..=k {
        let f_n = MeasurableFn::from_values([(n - 1, n as f64)]);
        let a = alpha_norm(&space, &f_n, p, TOL)?.value_or_inf();
        checks.push(check(format!("alpha(f_{n})"), a, eps / 2.0, REL_TOL));
    }
    // g_K value on cube n is n/K <= 1
    let g: MeasurableFn =
        MeasurableFn::from_values((1..=k).map(|n| (n - 1, n as f64 / k as f64)));
    let a = alpha_norm(&space, &g, p, TOL)?.value_or_inf();
    checks.push(check(
        format!("alpha(g_{k})"),
        a,
        norm_pow(k).powf(1.0 / p),
        REL_TOL,
    ));
    let escaped = a > r;
    checks.push(CheckLine {
        label: format!("g_{k} escapes B_R"),
        computed: a,
        expected: r,
        rel_err: 0.0,
        pass: escaped,
    });
    let notes = vec![format!("minimal K = {k} with ‖g_K‖_α > R = {r}")];
    Ok(GalleryReport::finish("nonconvex", checks, notes))
}

/// f(x) = x on the half-line: every scaling keeps ‖(1/n)f‖_μ = 1, while
/// the same scalings have infinite α-norm (f is not even in Λ_p).
fn frechet_pathology(params: &GalleryParams) -> Result<GalleryReport> {
    require(params.n >= 1, "n must be >= 1")?;
    let space = MeasureSpace::new(vec![], TailFamily::Constant { c: 1.0, start: 1 })?;
    let f = MeasurableFn::zero().with_tail(ValueFamily::Power { b: 1.0, t: -1.0 }, 1);
    let mut checks = Vec::new();
    let top = params.n.min(32);
    for n in 1..=top {
        let scaled = f.scale(1.0 / n as f64);
        let mu = frechet_mu(&space, &scaled, TOL)?;
        checks.push(check(format!("frechet_mu(f/{n})"), mu, 1.0, REL_TOL));
        let a = alpha_norm(&space, &scaled, params.p, TOL)?;
        checks.push(CheckLine {
            label: format!("alpha(f/{n}) infinite"),
            computed: a.value_or_inf(),
            expected: f64::INFINITY,
            rel_err: 0.0,
            pass: a == Extended::Infinite,
        });
    }
    let notes = vec![
        "the Frechet functional is not scalar-continuous: no scaling drives it below 1".into(),
    ];
    Ok(GalleryReport::finish("frechet_pathology", checks, notes))
}

/// The two component models of f(x) = 1/x on ℝ: dyadic shells near zero
/// (weights 2^-n, values 2^(n-1)) and the far field (unit atoms, values
/// 1/n).
pub fn one_over_x_spaces() -> (
    (MeasureSpace, MeasurableFn),
    (MeasureSpace, MeasurableFn),
) {
    let near = MeasureSpace::new(
        vec![],
        TailFamily::Geometric {
            a: 1.0,
            r: 0.5,
            start: 1,
        },
    )
    .expect("valid near-zero space");
    let f_near = MeasurableFn::zero().with_tail(ValueFamily::Geometric { b: 0.5, q: 2.0 }, 1);
    let far = MeasureSpace::new(vec![], TailFamily::Constant { c: 1.0, start: 1 })
        .expect("valid far-field space");
    let f_far = MeasurableFn::zero().with_tail(ValueFamily::Power { b: 1.0, t: 1.0 }, 1);
    ((near, f_near), (far, f_far))
}

/// 1/x belongs to Λ_p but not L_p for p > 1.
fn one_over_x(params: &GalleryParams) -> Result<GalleryReport> {
    let p = params.p;
    require(p > 1.0, "the example needs p > 1")?;
    let ((near, f_near), (far, f_far)) = one_over_x_spaces();
    let deltas = [0.5, 0.1, 0.01];
    let near_rep = lambda_p_member(&near, &f_near, p, &deltas, TOL)?;
    let far_rep = lambda_p_member(&far, &f_far, p, &deltas, TOL)?;
    let mut checks = Vec::new();
    let line = |label: &str, ok: bool| CheckLine {
        label: label.to_string(),
        computed: ok as u8 as f64,
        expected: 1.0,
        rel_err: 0.0,
        pass: ok,
    };
    checks.push(line(
        "near-zero part in Lambda_p",
        near_rep.verdict == Membership::Member,
    ));
    checks.push(line("near-zero part not in L_p", !near_rep.in_lp));
    checks.push(line(
        "far-field part in L_p",
        far_rep.verdict == Membership::Member && far_rep.in_lp,
    ));
    // witnesses excise shrinking neighborhoods of zero
    for (delta, w) in &near_rep.witnesses {
        let m = w.measure(&near, TOL)?.value_or_inf();
        checks.push(line(&format!("witness measure < {delta}"), m < *delta));
    }
    let notes = vec![
        "f restricted to |x| > delta is p-integrable for every delta > 0; the \
         divergence lives only at the origin"
            .into(),
    ];
    Ok(GalleryReport::finish("one_over_x", checks, notes))
}

/// On finite measure spaces every measurable function is a member.
fn finite_collapse(params: &GalleryParams) -> Result<GalleryReport> {
    require(params.p >= 1.0, "p must be >= 1")?;
    require(params.trials >= 1, "trials must be >= 1")?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut failures = 0usize;
    for _ in 0..params.trials {
        let n_cells = rng.random_range(1..=16);
        let weights: Vec<f64> = (0..n_cells).map(|_| rng.random::<f64>() + 1e-6).collect();
        let space = MeasureSpace::finite(&weights)?;
        let f = crate::functionals::random_fn(&space, &mut rng);
        let rep = lambda_p_member(&space, &f, params.p, &[0.5, 0.1], TOL)?;
        if rep.verdict != Membership::Member {
            failures += 1;
        }
    }
    let checks = vec![check(
        format!("members in {} random trials", params.trials),
        (params.trials - failures) as f64,
        params.trials as f64,
        0.0,
    )];
    Ok(GalleryReport::finish(
        "finite_collapse",
        checks,
        vec!["finite measure: L_0 = Lambda_p for all p".into()],
    ))
}
