//! Scalar functionals of the Λ_p topology: the F-norm ‖·‖_{α_p}, the
//! restricted F-seminorms, the Fréchet functional for convergence in
//! measure, the absolute-continuity modulus, and the Λ_p membership
//! decision, together with the property checkers built on them.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AlpError, Result};
use crate::measure::{
    integrate_p, integrate_p_whole, measure_of, support_measure, Extended, GeoPow, MeasurableFn,
    MeasurableSet, MeasureSpace, TailRange, TailSegment,
};

/// ‖f‖_{α_p} = ‖min(|f|,1)‖_p, an extended real.
pub fn alpha_norm(space: &MeasureSpace, f: &MeasurableFn, p: f64, tol: f64) -> Result<Extended> {
    Ok(alpha_norm_pow(space, f, p, tol)?.powf(1.0 / p))
}

/// ‖f‖_{α_p}^p = ∫ min(|f|,1)^p dμ.
pub fn alpha_norm_pow(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    tol: f64,
) -> Result<Extended> {
    integrate_p_whole(space, &f.min_one(), p, tol)
}

/// ‖f‖_{α_p,F} = ‖f χ_F‖_{α_p}; requires μ(F) < ∞.
pub fn alpha_seminorm_on(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    set: &MeasurableSet,
    tol: f64,
) -> Result<f64> {
    if !set.measure(space, tol)?.is_finite() {
        return Err(AlpError::InfiniteMeasureSet);
    }
    let pow = integrate_p(space, &f.min_one(), p, set, tol)?;
    Ok(pow.value_or_inf().powf(1.0 / p))
}

/// inf_{δ>0} { μ(|f| > δ) + δ } without truncation; +∞ when every
/// superlevel set has infinite measure.
///
/// δ ↦ μ(|f| > δ) is a right-continuous non-increasing step function on
/// the cell model, so the infimum is attained along the distinct values
/// of |f| (tail values enumerated up to a cap) and the δ ↓ 0 limit.
pub fn frechet_inf(space: &MeasureSpace, f: &MeasurableFn, tol: f64) -> Result<Extended> {
    const TAIL_CANDIDATES: u64 = 512;
    let mut candidates: Vec<f64> = f.distinct_cell_magnitudes();
    if let Some(start) = space.tail.start() {
        for seg in &f.tail {
            if seg.family.is_zero() {
                continue;
            }
            let lo = seg.lo.max(start);
            let hi = seg.hi.unwrap_or(lo + TAIL_CANDIDATES).min(lo + TAIL_CANDIDATES);
            for n in lo..hi {
                let v = seg.family.magnitude(n);
                if v > 0.0 {
                    candidates.push(v);
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();

    // δ ↓ 0 limit: μ(|f| > 0)
    let mut best = support_measure(space, f, tol)?;
    for delta in candidates {
        let g = measure_of(space, f, delta, tol)?.add(Extended::exact(delta));
        if g.value_or_inf() < best.value_or_inf() {
            best = g;
        }
    }
    Ok(best)
}

/// Fréchet functional ‖f‖_μ = min(inf_{δ>0}{μ(|f|>δ)+δ}, 1).
pub fn frechet_mu(space: &MeasureSpace, f: &MeasurableFn, tol: f64) -> Result<f64> {
    Ok(frechet_inf(space, f, tol)?.value_or_inf().min(1.0))
}

/// One sample of the absolute-continuity modulus curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ACSample {
    pub delta: f64,
    pub omega: Extended,
    /// true when the value is a greedy upper bound rather than the exact sup
    pub is_bound: bool,
}

/// ω(δ) = sup { ∫_E |f|^p dμ : μ(E) < δ } sampled on a δ grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ACModulusCurve {
    pub p: f64,
    pub samples: Vec<ACSample>,
}

const ENUM_ATOM_LIMIT: usize = 20;
const MATERIALIZED_TAIL_ATOMS: u64 = 20_000;

/// Compute the AC modulus by fractional greedy selection in decreasing
/// order of |f|^p density (exact on divisible cells), exact enumeration
/// on small purely atomic spaces, with analytic detection of ω = ∞.
pub fn ac_modulus(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    deltas: &[f64],
    tol: f64,
) -> Result<ACModulusCurve> {
    let mut samples = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        samples.push(ac_modulus_at(space, f, p, delta, tol)?);
    }
    Ok(ACModulusCurve { p, samples })
}

fn ac_modulus_at(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    delta: f64,
    tol: f64,
) -> Result<ACSample> {
    debug_assert!(delta > 0.0);
    if tail_sup_unbounded_under_budget(space, f, p, delta) {
        return Ok(ACSample {
            delta,
            omega: Extended::Infinite,
            is_bound: false,
        });
    }

    // exact enumeration on small purely atomic finite spaces (strict μ(E) < δ)
    if !space.has_tail()
        && space.cells.iter().all(|c| !c.divisible)
        && space.cells.len() <= ENUM_ATOM_LIMIT
    {
        let n = space.cells.len();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << n) {
            let mut m = 0.0;
            let mut val = 0.0;
            for (i, c) in space.cells.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    m += c.weight;
                    val += c.weight * f.value(c.id).abs().powf(p);
                }
            }
            if m < delta && val > best {
                best = val;
            }
        }
        return Ok(ACSample {
            delta,
            omega: Extended::exact(best),
            is_bound: false,
        });
    }

    // fractional greedy over cells plus materialized tail atoms
    struct Item {
        weight: f64,
        density: f64, // |f|^p on the item
        divisible: bool,
    }
    let mut pool: Vec<Item> = space
        .cells
        .iter()
        .map(|c| Item {
            weight: c.weight,
            density: f.value(c.id).abs().powf(p),
            divisible: c.divisible,
        })
        .filter(|it| it.weight > 0.0 && it.density > 0.0)
        .collect();
    let mut slack = 0.0f64;
    if let Some(start) = space.tail.start() {
        let cap = start + MATERIALIZED_TAIL_ATOMS;
        for seg in &f.tail {
            if seg.family.is_zero() {
                continue;
            }
            if let Some(clipped) = seg.clip(start, Some(cap)) {
                let hi = clipped.hi.unwrap();
                for n in clipped.lo..hi {
                    let w = space.tail.atom_weight(n);
                    let d = clipped.family.magnitude(n).powf(p);
                    if w > 0.0 && d > 0.0 {
                        pool.push(Item {
                            weight: w,
                            density: d,
                            divisible: false,
                        });
                    }
                }
            }
            // beyond the materialized range the values are non-increasing
            // (growing families were handled analytically above), so the
            // unexplored contribution is at most density(cap) * δ
            if seg.hi.map_or(true, |h| h > cap) {
                let d = seg.family.sup_from(cap).powf(p);
                if d.is_finite() {
                    slack += d * delta;
                }
            }
        }
    }
    pool.sort_by(|a, b| b.density.partial_cmp(&a.density).unwrap());
    let mut budget = delta;
    let mut value = 0.0;
    let mut is_bound = slack > tol;
    for it in &pool {
        if budget <= 0.0 {
            break;
        }
        if it.divisible {
            let take = it.weight.min(budget);
            value += take * it.density;
            budget -= take;
        } else if it.weight < budget {
            // strict: atoms must fit strictly inside the budget
            value += it.weight * it.density;
            budget -= it.weight;
        } else {
            // an atom that does not fit is skipped; the greedy result is
            // then only an upper-bound certificate, not the exact sup
            is_bound = true;
        }
    }
    // borderline-critical densities can overflow the greedy accumulator
    // even when the analytic detector rounds to "convergent"; an
    // unrepresentably large sup is reported as infinite
    let omega = if value.is_finite() {
        Extended::Finite {
            value,
            abs_err: slack,
        }
    } else {
        Extended::Infinite
    };
    Ok(ACSample {
        delta,
        omega,
        is_bound,
    })
}

/// Can sets of measure < δ carry arbitrarily large ∫ |f|^p?
fn tail_sup_unbounded_under_budget(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    delta: f64,
) -> bool {
    let start = match space.tail.start() {
        Some(s) => s,
        None => return false,
    };
    let w = space.tail.weight_geopow();
    for seg in &f.tail {
        if seg.family.is_zero() || seg.hi.is_some() {
            continue;
        }
        if seg.clip(start, None).is_none() {
            continue;
        }
        let (c, r, s) = seg.family.pow_contribution(p);
        let gp = GeoPow::new(w.coef * c, w.ratio * r, w.sigma + s);
        let divergent = !gp.converges();
        // (a) divergent mass on a vanishing-mass suffix
        if divergent && space.tail.mass_finite() {
            return true;
        }
        // (b) single far atoms of unbounded contribution that fit the budget
        let term_unbounded = gp.ratio > 1.0 || (gp.ratio == 1.0 && gp.sigma < 0.0);
        if term_unbounded {
            let fits = match space.tail {
                crate::measure::TailFamily::Constant { c, .. } => c < delta,
                // geometric / power atom weights vanish, so far atoms fit
                _ => true,
            };
            if fits {
                return true;
            }
        }
    }
    false
}

/// Λ_p membership verdict with witness sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipReport {
    pub verdict: Membership,
    /// per-δ witness E_δ with μ(E_δ) < δ (members only)
    pub witnesses: Vec<(f64, MeasurableSet)>,
    /// a δ for which no admissible cover exists (non-members only)
    pub certificate_delta: Option<f64>,
    /// whether ∫ |f|^p over the whole space is finite
    pub in_lp: bool,
}

/// Decide membership in Λ_p: the only infinite-mass sources in the
/// analytic model are unbounded tail segments with divergent series; a
/// witness E_δ must cover them within measure budget δ.
pub fn lambda_p_member(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    deltas: &[f64],
    tol: f64,
) -> Result<MembershipReport> {
    let total = integrate_p_whole(space, f, p, tol)?;
    if total.is_finite() {
        return Ok(MembershipReport {
            verdict: Membership::Member,
            witnesses: deltas.iter().map(|&d| (d, MeasurableSet::empty())).collect(),
            certificate_delta: None,
            in_lp: true,
        });
    }
    // infinite integral: witnesses must excise the divergent tail suffix
    if space.tail.mass_finite() {
        let mut witnesses = Vec::new();
        for &delta in deltas {
            let k = suffix_below_mass(space, delta, tol)?;
            witnesses.push((delta, MeasurableSet::tail_from(k)));
        }
        return Ok(MembershipReport {
            verdict: Membership::Member,
            witnesses,
            certificate_delta: None,
            in_lp: false,
        });
    }
    // suffix mass never drops below any δ: on constant-weight tails a set
    // of measure < min(c, δ) contains no tail atom at all, and on slowly
    // decaying power tails any admissible cover leaves a divergent
    // complement (values are monotone).
    let certificate = match space.tail {
        crate::measure::TailFamily::Constant { c, .. } => c.min(1.0) / 2.0,
        _ => deltas.last().copied().unwrap_or(0.5),
    };
    Ok(MembershipReport {
        verdict: Membership::NonMember,
        witnesses: Vec::new(),
        certificate_delta: Some(certificate),
        in_lp: false,
    })
}

/// Smallest k with tail mass from k strictly below `budget`.
fn suffix_below_mass(space: &MeasureSpace, budget: f64, tol: f64) -> Result<u64> {
    let start = space.tail.start().unwrap_or(1);
    let mut k = start;
    let mut step = 1u64;
    loop {
        let m = space.tail.mass_from(k, tol)?;
        if m.value_or_inf() + m.abs_err() < budget {
            return Ok(k);
        }
        k += step;
        step = (step * 2).min(1 << 20);
        if k > start + (1 << 40) {
            return Err(AlpError::ToleranceNotReached {
                tol: budget,
                max_terms: 1 << 40,
            });
        }
    }
}

/// f restricted to the region {|f| > 1}.
pub fn restrict_above_one(f: &MeasurableFn) -> MeasurableFn {
    let values: BTreeMap<usize, f64> = f
        .values
        .iter()
        .filter(|(_, v)| v.abs() > 1.0)
        .map(|(&k, &v)| (k, v))
        .collect();
    let mut tail = Vec::new();
    for seg in &f.tail {
        match seg.family.superlevel(1.0, seg.lo, seg.hi) {
            TailRange::Empty => {}
            TailRange::Bounded { lo, hi } => tail.push(TailSegment {
                lo,
                hi: Some(hi),
                family: seg.family,
                sign: seg.sign,
            }),
            TailRange::Unbounded { lo } => tail.push(TailSegment {
                lo,
                hi: None,
                family: seg.family,
                sign: seg.sign,
            }),
        }
    }
    MeasurableFn { values, tail }
}

/// Two-sided membership characterization: f ∈ Λ_p iff ‖f‖_{α_p} < ∞ and
/// the part above level 1 is coverable outside sets of small measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncatedMembershipReport {
    pub direct: Membership,
    pub via_truncation: Membership,
    pub alpha_finite: bool,
    pub agree: bool,
}

pub fn truncated_membership_check(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    deltas: &[f64],
    tol: f64,
) -> Result<TruncatedMembershipReport> {
    let direct = lambda_p_member(space, f, p, deltas, tol)?.verdict;
    let alpha_finite = alpha_norm_pow(space, f, p, tol)?.is_finite();
    let above = restrict_above_one(f);
    let above_cover = lambda_p_member(space, &above, p, deltas, tol)?.verdict;
    let via = if alpha_finite && above_cover == Membership::Member {
        Membership::Member
    } else if above_cover == Membership::Inconclusive {
        Membership::Inconclusive
    } else {
        Membership::NonMember
    };
    let agree = direct == via;
    Ok(TruncatedMembershipReport {
        direct,
        via_truncation: via,
        alpha_finite,
        agree,
    })
}

/// Generic check report used by the property suites.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub trials: usize,
    pub violations: Vec<String>,
    pub max_residual: f64,
}

impl CheckReport {
    pub fn new(check: &str) -> Self {
        CheckReport {
            check: check.to_string(),
            trials: 0,
            violations: Vec::new(),
            max_residual: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, residual: f64, tol: f64, msg: impl FnOnce() -> String) {
        if residual > self.max_residual {
            self.max_residual = residual;
        }
        if residual > tol {
            self.violations.push(msg());
        }
    }
}

/// Random-function generator for the property suites: log-uniform
/// magnitudes in [1e-3, 1e3] with random signs, 20% pinned to zero and
/// 10% pinned near the kink |f| = 1.
pub fn random_fn<R: Rng>(space: &MeasureSpace, rng: &mut R) -> MeasurableFn {
    let mut values = BTreeMap::new();
    for c in &space.cells {
        let u: f64 = rng.random();
        let mag = if u < 0.2 {
            0.0
        } else if u < 0.3 {
            0.9 + 0.2 * rng.random::<f64>()
        } else {
            10f64.powf(-3.0 + 6.0 * rng.random::<f64>())
        };
        if mag > 0.0 {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            values.insert(c.id, sign * mag);
        }
    }
    MeasurableFn {
        values,
        tail: Vec::new(),
    }
}

const REL_SLACK: f64 = 1e-12;

/// Verify the F-norm axioms over random (f, g, λ) triples.
pub fn fnorm_axioms_check<R: Rng>(
    space: &MeasureSpace,
    p: f64,
    trials: usize,
    tol: f64,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("fnorm_axioms");
    for trial in 0..trials {
        report.trials += 1;
        let f = random_fn(space, rng);
        let g = random_fn(space, rng);
        let lambda = 2.0 * rng.random::<f64>() - 1.0;

        let nf = alpha_norm(space, &f, p, tol)?.value_or_inf();
        let ng = alpha_norm(space, &g, p, tol)?.value_or_inf();
        let scale = 1.0 + nf + ng;

        // (i) nonnegativity and definiteness
        if nf < 0.0 {
            report.record(-nf, 0.0, || format!("trial {trial}: negative norm {nf}"));
        }
        if nf == 0.0 {
            let nonzero = f
                .values
                .iter()
                .any(|(&id, &v)| v != 0.0 && space.cell(id).map_or(0.0, |c| c.weight) > 0.0);
            if nonzero {
                report
                    .violations
                    .push(format!("trial {trial}: norm 0 for nonzero f"));
            }
        }

        // (ii) scalar monotonicity for |λ| <= 1
        let nl = alpha_norm(space, &f.scale(lambda), p, tol)?.value_or_inf();
        report.record(nl - nf, REL_SLACK * scale, || {
            format!("trial {trial}: ‖λf‖ = {nl} > ‖f‖ = {nf} for λ = {lambda}")
        });

        // |λ| = 1 symmetry is exact
        let nneg = alpha_norm(space, &f.neg(), p, tol)?.value_or_inf();
        report.record((nneg - nf).abs(), 0.0, || {
            format!("trial {trial}: ‖-f‖ = {nneg} != ‖f‖ = {nf}")
        });

        // (iii) scalar continuity along λ_k = 2^-k
        let mut prev = f64::INFINITY;
        let mut last = f64::INFINITY;
        for k in 1..=40 {
            let lam = 2f64.powi(-k);
            let n = alpha_norm(space, &f.scale(lam), p, tol)?.value_or_inf();
            report.record(n - prev, REL_SLACK * scale, || {
                format!("trial {trial}: ‖2^-{k} f‖ = {n} not monotone below {prev}")
            });
            prev = n;
            last = n;
        }
        if last > 1e-6 {
            report
                .violations
                .push(format!("trial {trial}: ‖2^-40 f‖ = {last} not below 1e-6"));
        }

        // (iv) triangle inequality
        let sum = f.sub(&g.neg())?;
        let ns = alpha_norm(space, &sum, p, tol)?.value_or_inf();
        report.record(ns - (nf + ng), REL_SLACK * scale, || {
            format!("trial {trial}: ‖f+g‖ = {ns} > ‖f‖+‖g‖ = {}", nf + ng)
        });
    }
    Ok(report)
}

/// The two displayed estimates linking the restricted seminorm, the
/// Fréchet infimum, and the F-norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateChainReport {
    pub seminorm_pow: f64,
    pub frechet_inf: Extended,
    pub alpha_pow: Extended,
    pub first_holds: bool,
    pub second_holds: bool,
}

pub fn estimate_chain_check(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    set: &MeasurableSet,
    delta0: f64,
    tol: f64,
) -> Result<EstimateChainReport> {
    let mu_f = set.measure(space, tol)?;
    if !mu_f.is_finite() {
        return Err(AlpError::InfiniteMeasureSet);
    }
    let mu_f = mu_f.value_or_inf();
    let semi = alpha_seminorm_on(space, f, p, set, tol)?.powf(p);
    let inf = frechet_inf(space, f, tol)?;
    let alpha_pow = alpha_norm_pow(space, f, p, tol)?;

    let slack = REL_SLACK * (1.0 + semi.abs() + mu_f);
    let first = semi <= mu_f.max(1.0) * inf.value_or_inf() + slack;
    let second = inf.value_or_inf()
        <= delta0.powf(-p).max(1.0) * alpha_pow.value_or_inf() + delta0 + slack;
    Ok(EstimateChainReport {
        seminorm_pow: semi,
        frechet_inf: inf,
        alpha_pow,
        first_holds: first,
        second_holds: second,
    })
}

/// Brute-force verification that
/// min_B [ ∫_B |f|^p dμ + μ(B^c) ] = ‖f‖_{α_p}^p, attained at B = {|f| <= 1}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationalReport {
    pub brute_min: f64,
    pub alpha_pow: f64,
    pub identity_holds: bool,
    pub canonical_minimizer_optimal: bool,
}

pub fn alpha_norm_variational_identity(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    tol: f64,
) -> Result<VariationalReport> {
    const LIMIT: usize = 20;
    if space.has_tail() || space.cells.len() > LIMIT {
        return Err(AlpError::BruteForceTooLarge {
            cells: space.cells.len(),
            limit: LIMIT,
        });
    }
    let n = space.cells.len();
    let total: f64 = space.finite_part_measure();
    let mut best = f64::INFINITY;
    let mut canonical_val = f64::NAN;
    let canonical_mask: u32 = space
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| f.value(c.id).abs() <= 1.0)
        .map(|(i, _)| 1u32 << i)
        .sum();
    for mask in 0u32..(1 << n) {
        let mut inside = 0.0;
        let mut m_in = 0.0;
        for (i, c) in space.cells.iter().enumerate() {
            if mask >> i & 1 == 1 {
                inside += c.weight * f.value(c.id).abs().powf(p);
                m_in += c.weight;
            }
        }
        let val = inside + (total - m_in);
        if val < best {
            best = val;
        }
        if mask == canonical_mask {
            canonical_val = val;
        }
    }
    let alpha_pow = alpha_norm_pow(space, f, p, tol)?.value_or_inf();
    let slack = 1e-12 * (1.0 + alpha_pow.abs() + total);
    Ok(VariationalReport {
        brute_min: best,
        alpha_pow,
        identity_holds: (best - alpha_pow).abs() <= slack,
        canonical_minimizer_optimal: (canonical_val - best).abs() <= slack,
    })
}

/// ‖f‖_{α_q}^q <= ‖f‖_{α_p}^p for q >= p.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub pow_p: Extended,
    pub pow_q: Extended,
    pub holds: bool,
}

pub fn alpha_monotone_in_p(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    q: f64,
    tol: f64,
) -> Result<MonotoneReport> {
    if !(1.0 <= p && p <= q) {
        return Err(AlpError::Invalid(format!("need 1 <= p <= q, got p={p}, q={q}")));
    }
    let pow_p = alpha_norm_pow(space, f, p, tol)?;
    let pow_q = alpha_norm_pow(space, f, q, tol)?;
    let slack = REL_SLACK * (1.0 + pow_p.value_or_inf().min(1e300))
        + pow_p.abs_err()
        + pow_q.abs_err();
    let holds = match (pow_q, pow_p) {
        (Extended::Infinite, Extended::Infinite) => true,
        (Extended::Infinite, Extended::Finite { .. }) => false,
        (Extended::Finite { .. }, Extended::Infinite) => true,
        (Extended::Finite { value: vq, .. }, Extended::Finite { value: vp, .. }) => {
            vq <= vp + slack
        }
    };
    Ok(MonotoneReport { pow_p, pow_q, holds })
}
