//! Sequence framework and checkers for the convergence modes of the Λ_p
//! topology, their implication lattice, dominated convergence, and the
//! three Vitali theorems.
//!
//! Checkers are numeric-evidence procedures over finite index prefixes,
//! never proofs: each produces a three-valued verdict from an explicit
//! trace. `Holds` needs the trace to sit below tolerance or to decay
//! across the last two quarter-windows; `Fails` needs it to stay large
//! and flat; everything in between is `Inconclusive`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{AlpError, Result};
use crate::functionals::{ac_modulus, alpha_norm, lambda_p_member, Membership};
use crate::measure::{
    integrate_p, integrate_p_complement, integrate_p_whole, integrate_signed_complement,
    measure_of, Cell, Extended, MeasurableFn, MeasurableSet, MeasureSpace, TailFamily,
    TailSegment, ValueFamily,
};

/// Default index horizon.
pub const DEFAULT_N_MAX: usize = 64;
/// Default trace tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Default δ grid {1, 1/2, …, 2^-10} for in-measure style checks.
pub fn default_delta_grid() -> Vec<f64> {
    (0..=10).map(|k| 2f64.powi(-k)).collect()
}

/// Three-valued checker verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Holds;
        for v in verdicts {
            match v {
                Verdict::Fails => return Verdict::Fails,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Holds => {}
            }
        }
        out
    }
}

/// Evidence for a single mode: the verdict, the numeric trace that
/// produced it, and any witness descriptions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeReport {
    pub mode: String,
    pub verdict: Verdict,
    /// (index, value) pairs; the index is n for index traces and δ (or a
    /// prefix size) for grid traces
    pub trace: Vec<(f64, f64)>,
    pub witnesses: Vec<String>,
    pub detail: Option<String>,
}

impl ModeReport {
    fn new(mode: &str, verdict: Verdict, trace: Vec<(f64, f64)>) -> Self {
        ModeReport {
            mode: mode.to_string(),
            verdict,
            trace,
            witnesses: Vec::new(),
            detail: None,
        }
    }
}

/// Trend test on a trace: compare the maxima of the third and fourth
/// quarter windows. The trace holds when the final window is below
/// tolerance or has decayed by a factor ≥ 4/3 relative to the previous
/// window; it fails when it is both large (≥ 10·tol) and flat (≥ 0.9 of
/// the previous window); ambiguous regimes stay inconclusive.
pub fn trace_verdict(values: &[f64], tol: f64) -> Verdict {
    if values.is_empty() {
        return Verdict::Inconclusive;
    }
    if values.iter().all(|&v| v < tol) {
        return Verdict::Holds;
    }
    if values.len() < 8 {
        return Verdict::Inconclusive;
    }
    let n = values.len();
    let m1 = values[n / 2..3 * n / 4]
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let m2 = values[3 * n / 4..].iter().cloned().fold(0.0f64, f64::max);
    if m2 < tol || (m2.is_finite() && m2 <= 0.75 * m1) {
        Verdict::Holds
    } else if m2 >= 10.0 * tol && m2 >= 0.9 * m1 {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

/// Closed-form sequence families plus explicit lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SeqKind {
    /// f_n = n·χ_{(0,1/n)} on (0,1]
    NChiShrinking,
    /// f_n = χ_{(0,1/n)} on (0,1]
    ChiShrinking,
    /// f_n = χ_{(n,n+1)} on [0,∞) (unit-weight atomic tail)
    EscapingBox,
    /// f_n = f for every n
    Constant { f: MeasurableFn },
    /// explicit list; indices beyond the list repeat the last entry
    Explicit { terms: Vec<MeasurableFn> },
}

/// A sequence of measurable functions on a common space, with an
/// optional candidate limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FnSequence {
    pub space: MeasureSpace,
    pub kind: SeqKind,
    pub n_max: usize,
    /// highest index the space resolution represents faithfully
    pub n_sup: usize,
    pub limit: Option<MeasurableFn>,
    /// cells below the model's resolution, excluded from pointwise checks
    pub unresolved_cells: BTreeSet<usize>,
}

/// Resolution of the shrinking-interval models: cells (1/(j+1), 1/j]
/// for j = 1..M plus one remainder cell (0, 1/(M+1)].
const SHRINKING_RESOLUTION: usize = 2048;
const REMAINDER_CELL: usize = 0;

fn shrinking_space(m: usize) -> MeasureSpace {
    let mut cells = Vec::with_capacity(m + 1);
    cells.push(Cell {
        id: REMAINDER_CELL,
        weight: 1.0 / (m as f64 + 1.0),
        divisible: true,
    });
    for j in 1..=m {
        cells.push(Cell {
            id: j,
            weight: 1.0 / j as f64 - 1.0 / (j as f64 + 1.0),
            divisible: true,
        });
    }
    MeasureSpace::new(cells, TailFamily::None).expect("valid shrinking space")
}

impl FnSequence {
    /// f_n = n·χ_{(0,1/n)} on the unit interval, candidate limit 0.
    pub fn n_chi_shrinking(n_max: usize) -> FnSequence {
        let m = SHRINKING_RESOLUTION.max(n_max);
        // cells finer than a quarter of the index horizon cannot witness
        // their pointwise limit within the horizon; exclude them from
        // pointwise checks (total excluded mass ≈ 4/n_max)
        let mut unresolved: BTreeSet<usize> = [REMAINDER_CELL].into();
        unresolved.extend(n_max / 4 + 1..=m);
        FnSequence {
            space: shrinking_space(m),
            kind: SeqKind::NChiShrinking,
            n_max,
            n_sup: m,
            limit: Some(MeasurableFn::zero()),
            unresolved_cells: unresolved,
        }
    }

    /// f_n = χ_{(0,1/n)}, candidate limit 0.
    pub fn chi_shrinking(n_max: usize) -> FnSequence {
        let mut seq = FnSequence::n_chi_shrinking(n_max);
        seq.kind = SeqKind::ChiShrinking;
        seq
    }

    /// f_n = χ_{(n,n+1)} on a unit-weight atomic ray, candidate limit 0.
    pub fn escaping_box(n_max: usize) -> FnSequence {
        let space = MeasureSpace::new(vec![], TailFamily::Constant { c: 1.0, start: 1 })
            .expect("valid ray space");
        FnSequence {
            space,
            kind: SeqKind::EscapingBox,
            n_max,
            n_sup: usize::MAX,
            limit: Some(MeasurableFn::zero()),
            unresolved_cells: BTreeSet::new(),
        }
    }

    /// f_n = f for every n, candidate limit f.
    pub fn constant(space: MeasureSpace, f: MeasurableFn, n_max: usize) -> FnSequence {
        FnSequence {
            space,
            kind: SeqKind::Constant { f: f.clone() },
            n_max,
            n_sup: usize::MAX,
            limit: Some(f),
            unresolved_cells: BTreeSet::new(),
        }
    }

    /// Explicit term list.
    pub fn explicit(
        space: MeasureSpace,
        terms: Vec<MeasurableFn>,
        limit: Option<MeasurableFn>,
    ) -> Result<FnSequence> {
        if terms.is_empty() {
            return Err(AlpError::Invalid("explicit sequence needs terms".into()));
        }
        let n_max = terms.len();
        Ok(FnSequence {
            space,
            kind: SeqKind::Explicit { terms },
            n_max,
            n_sup: usize::MAX,
            limit,
            unresolved_cells: BTreeSet::new(),
        })
    }

    /// The n-th term (1-based); indices above the supported resolution
    /// are clamped.
    pub fn term(&self, n: usize) -> MeasurableFn {
        let n = n.clamp(1, self.n_sup);
        match &self.kind {
            SeqKind::NChiShrinking | SeqKind::ChiShrinking => {
                let m = self.n_sup;
                let v = match self.kind {
                    SeqKind::NChiShrinking => n as f64,
                    _ => 1.0,
                };
                let mut values = BTreeMap::new();
                values.insert(REMAINDER_CELL, v);
                for j in n..=m {
                    values.insert(j, v);
                }
                MeasurableFn {
                    values,
                    tail: Vec::new(),
                }
            }
            SeqKind::EscapingBox => MeasurableFn {
                values: BTreeMap::new(),
                tail: vec![TailSegment {
                    lo: n as u64,
                    hi: Some(n as u64 + 1),
                    family: ValueFamily::Constant { b: 1.0 },
                    sign: 1,
                }],
            },
            SeqKind::Constant { f } => f.clone(),
            SeqKind::Explicit { terms } => terms[(n - 1).min(terms.len() - 1)].clone(),
        }
    }

    /// f_n − f against the candidate limit.
    pub fn diff(&self, n: usize) -> Result<MeasurableFn> {
        let limit = self.limit.as_ref().ok_or(AlpError::MissingLimit)?;
        self.term(n).sub(limit)
    }

    pub fn indices(&self) -> Vec<usize> {
        (1..=self.n_max).collect()
    }

    /// Index sample for sup-style checks: the full prefix plus a
    /// geometric extension up to `upto`, so suprema that peak beyond the
    /// horizon (e.g. at n ≈ 1/δ) are still sampled.
    pub fn extended_indices(&self, upto: usize) -> Vec<usize> {
        let mut out = self.indices();
        let mut k = self.n_max.next_power_of_two().max(1);
        while k <= upto && k <= self.n_sup {
            if k > self.n_max {
                out.push(k);
            }
            k = k.saturating_mul(2);
        }
        out
    }

    pub fn from_json(s: &str) -> Result<FnSequence> {
        #[derive(Deserialize)]
        struct Wire {
            family: String,
            #[serde(default)]
            n_max: Option<usize>,
            #[serde(default)]
            space: Option<MeasureSpace>,
            #[serde(default)]
            f: Option<MeasurableFn>,
            #[serde(default)]
            terms: Option<Vec<MeasurableFn>>,
            #[serde(default)]
            limit: Option<MeasurableFn>,
        }
        let w: Wire = serde_json::from_str(s).map_err(|e| AlpError::Invalid(e.to_string()))?;
        let n_max = w.n_max.unwrap_or(DEFAULT_N_MAX);
        match w.family.as_str() {
            "n_chi_shrinking" => Ok(FnSequence::n_chi_shrinking(n_max)),
            "chi_shrinking" => Ok(FnSequence::chi_shrinking(n_max)),
            "escaping_box" => Ok(FnSequence::escaping_box(n_max)),
            "constant" => {
                let space = w.space.ok_or_else(|| AlpError::Invalid("missing space".into()))?;
                let f = w.f.ok_or_else(|| AlpError::Invalid("missing f".into()))?;
                Ok(FnSequence::constant(space, f, n_max))
            }
            "explicit" => {
                let space = w.space.ok_or_else(|| AlpError::Invalid("missing space".into()))?;
                let terms = w.terms.ok_or_else(|| AlpError::Invalid("missing terms".into()))?;
                FnSequence::explicit(space, terms, w.limit)
            }
            other => Err(AlpError::Invalid(format!("unknown family {other:?}"))),
        }
    }
}

const INT_TOL: f64 = 1e-10;

/// ‖f_n − f‖_p → 0.
pub fn check_lp(seq: &FnSequence, p: f64, tol: f64) -> Result<ModeReport> {
    let mut trace = Vec::new();
    for n in seq.indices() {
        let d = seq.diff(n)?;
        let v = integrate_p_whole(&seq.space, &d, p, INT_TOL)?
            .powf(1.0 / p)
            .value_or_inf();
        trace.push((n as f64, v));
    }
    let verdict = trace_verdict(&values_of(&trace), tol);
    Ok(ModeReport::new("Lp", verdict, trace))
}

/// ‖f_n − f‖_{α_p} → 0.
pub fn check_alpha(seq: &FnSequence, p: f64, tol: f64) -> Result<ModeReport> {
    let mut trace = Vec::new();
    for n in seq.indices() {
        let d = seq.diff(n)?;
        let v = alpha_norm(&seq.space, &d, p, INT_TOL)?.value_or_inf();
        trace.push((n as f64, v));
    }
    let verdict = trace_verdict(&values_of(&trace), tol);
    Ok(ModeReport::new("alpha_p", verdict, trace))
}

/// sup_{n < m ≤ n+W} ‖f_n − f_m‖_{α_p} → 0 (limit-free Cauchy check).
pub fn check_alpha_cauchy(seq: &FnSequence, p: f64, tol: f64) -> Result<ModeReport> {
    const WINDOW: usize = 8;
    let mut trace = Vec::new();
    for n in seq.indices() {
        let fn_n = seq.term(n);
        let mut worst = 0.0f64;
        for m in n + 1..=(n + WINDOW).min(seq.n_max) {
            let d = fn_n.sub(&seq.term(m))?;
            let v = alpha_norm(&seq.space, &d, p, INT_TOL)?.value_or_inf();
            worst = worst.max(v);
        }
        trace.push((n as f64, worst));
    }
    let verdict = trace_verdict(&values_of(&trace), tol);
    Ok(ModeReport::new("alpha_cauchy", verdict, trace))
}

/// μ(|f_n − f| > δ) → 0 for every δ in the grid.
pub fn check_in_measure(seq: &FnSequence, delta_grid: &[f64], tol: f64) -> Result<ModeReport> {
    let mut verdicts = Vec::new();
    let mut trace = Vec::new();
    for &delta in delta_grid {
        let mut per_delta = Vec::new();
        for n in seq.indices() {
            let d = seq.diff(n)?;
            let v = measure_of(&seq.space, &d, delta, INT_TOL)?.value_or_inf();
            per_delta.push(v);
        }
        verdicts.push(trace_verdict(&per_delta, tol));
        trace.push((delta, *per_delta.last().unwrap()));
    }
    let verdict = Verdict::all(verdicts);
    let mut report = ModeReport::new("in_measure", verdict, trace);
    report.detail = Some("trace column: μ(|f_N − f| > δ) at N = N_max per δ".into());
    Ok(report)
}

/// A finite-measure prefix of the space: a cell subset plus the first
/// `tail_head` tail atoms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrefixSet {
    pub cell_ids: Vec<usize>,
    pub tail_head: u64,
}

impl PrefixSet {
    pub fn measure(&self, space: &MeasureSpace) -> f64 {
        let cells: f64 = self
            .cell_ids
            .iter()
            .filter_map(|&id| space.cell(id))
            .map(|c| c.weight)
            .sum();
        let head: f64 = match space.tail.start() {
            Some(start) => (start..start + self.tail_head)
                .map(|n| space.tail.atom_weight(n))
                .sum(),
            None => 0.0,
        };
        cells + head
    }
}

/// Default nested prefixes: all finite cells plus tail heads of
/// doubling length, capped at N_max/8 so the index horizon can still
/// witness escape from the largest prefix.
pub fn default_prefixes(seq: &FnSequence) -> Vec<PrefixSet> {
    let all_cells: Vec<usize> = seq.space.cells.iter().map(|c| c.id).collect();
    if !seq.space.has_tail() {
        return vec![PrefixSet {
            cell_ids: all_cells,
            tail_head: 0,
        }];
    }
    let cap = (seq.n_max / 8).max(1) as u64;
    let mut out = Vec::new();
    let mut k = 1u64;
    while k <= cap {
        out.push(PrefixSet {
            cell_ids: all_cells.clone(),
            tail_head: k,
        });
        k *= 2;
    }
    out
}

/// μ(F ∩ {|f_n − f| > δ}) for a prefix set F, by direct enumeration.
fn measure_on_prefix(
    space: &MeasureSpace,
    f: &MeasurableFn,
    delta: f64,
    prefix: &PrefixSet,
) -> f64 {
    let mut m = 0.0;
    for &id in &prefix.cell_ids {
        if f.value(id).abs() > delta {
            if let Some(c) = space.cell(id) {
                m += c.weight;
            }
        }
    }
    if let Some(start) = space.tail.start() {
        for n in start..start + prefix.tail_head {
            if f.tail_value(n).abs() > delta {
                m += space.tail.atom_weight(n);
            }
        }
    }
    m
}

/// In-measure convergence on every finite-measure test prefix.
pub fn check_local_in_measure(
    seq: &FnSequence,
    test_sets: Option<&[PrefixSet]>,
    delta_grid: &[f64],
    tol: f64,
) -> Result<ModeReport> {
    let defaults;
    let sets = match test_sets {
        Some(s) => s,
        None => {
            defaults = default_prefixes(seq);
            &defaults
        }
    };
    let mut verdicts = Vec::new();
    let mut trace = Vec::new();
    for (si, set) in sets.iter().enumerate() {
        for &delta in delta_grid {
            let mut per = Vec::new();
            for n in seq.indices() {
                let d = seq.diff(n)?;
                per.push(measure_on_prefix(&seq.space, &d, delta, set));
            }
            verdicts.push(trace_verdict(&per, tol));
            trace.push((si as f64 + delta, *per.last().unwrap()));
        }
    }
    let verdict = Verdict::all(verdicts);
    let mut report = ModeReport::new("local_in_measure", verdict, trace);
    report.detail = Some(format!("{} test prefixes", sets.len()));
    Ok(report)
}

/// Greedy witness E_δ for convergence almost in L_p: cover the cells
/// that carry the late-index mass, plus a tail suffix when one fits.
fn almost_lp_witness(seq: &FnSequence, p: f64, delta: f64) -> Result<MeasurableSet> {
    // score cells by sup over the late half of |f_n - f|
    let mut score: BTreeMap<usize, f64> = BTreeMap::new();
    let mut tail_needed = false;
    for n in (seq.n_max / 2).max(1)..=seq.n_max {
        let d = seq.diff(n)?;
        for (&id, &v) in &d.values {
            let e = score.entry(id).or_insert(0.0);
            *e = e.max(v.abs());
        }
        if d.tail.iter().any(|s| !s.family.is_zero()) {
            tail_needed = true;
        }
    }
    let mut budget = delta;
    let mut set = MeasurableSet::empty();
    if tail_needed && seq.space.tail.mass_finite() {
        // spend half the budget on a tail suffix
        let start = seq.space.tail.start().unwrap_or(1);
        let mut k = start;
        loop {
            let m = seq.space.tail.mass_from(k, INT_TOL)?;
            if m.value_or_inf() + m.abs_err() < budget / 2.0 {
                set = MeasurableSet::tail_from(k);
                budget -= m.value_or_inf() + m.abs_err();
                break;
            }
            k += 1;
            if k > start + 1_000_000 {
                break;
            }
        }
    }
    let mut scored: Vec<(usize, f64)> = score
        .into_iter()
        .filter(|&(_, s)| s > 0.0 && p > 0.0)
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for (id, _) in scored {
        if budget <= 0.0 {
            break;
        }
        let w = seq.space.cell(id).map_or(0.0, |c| c.weight);
        let cell = seq.space.cell(id).unwrap();
        if cell.divisible {
            let frac = (budget / w).min(1.0);
            if frac >= 1.0 {
                set.finite_part.insert(id);
                budget -= w;
            } else if frac > 0.0 {
                // keep strictly inside the budget
                set.fractions.insert(id, (frac * 0.999).min(1.0));
                budget = 0.0;
            }
        } else if w < budget {
            set.finite_part.insert(id);
            budget -= w;
        }
    }
    Ok(set)
}

/// ∃ E_δ with μ(E_δ) < δ and ∫_{E_δ^c} |f_n − f|^p → 0 for each δ.
pub fn check_almost_lp(
    seq: &FnSequence,
    p: f64,
    deltas: &[f64],
    tol: f64,
) -> Result<ModeReport> {
    let mut verdicts = Vec::new();
    let mut witnesses = Vec::new();
    let mut trace = Vec::new();
    for &delta in deltas {
        let witness = almost_lp_witness(seq, p, delta)?;
        let compl = witness.complement(&seq.space);
        let mut per = Vec::new();
        for n in seq.indices() {
            let d = seq.diff(n)?;
            per.push(
                integrate_p_complement(&seq.space, &d, p, &compl, INT_TOL)?.value_or_inf(),
            );
        }
        verdicts.push(trace_verdict(&per, tol));
        trace.push((delta, *per.last().unwrap()));
        witnesses.push(format!(
            "delta={delta}: mu(E)={:.6}",
            witness.measure(&seq.space, INT_TOL)?.value_or_inf()
        ));
    }
    // the greedy witness is heuristic: success is sound, failure is
    // refuted only through the α lower bound ‖d‖_α^p <= ∫_{E^c}|d|^p + μ(E)
    let mut verdict = Verdict::all(verdicts);
    if verdict == Verdict::Fails {
        verdict = match check_alpha(seq, p, tol)?.verdict {
            Verdict::Fails => Verdict::Fails,
            _ => Verdict::Inconclusive,
        };
    }
    let mut report = ModeReport::new("almost_Lp", verdict, trace);
    report.witnesses = witnesses;
    report.detail = Some("greedy witness; failure confirmed via alpha lower bound".into());
    Ok(report)
}

/// U(δ) = sup_n ω_{f_n}(δ) ↓ 0: uniform p-integrability.
pub fn check_uniform_p_integrability(
    seq: &FnSequence,
    p: f64,
    deltas: &[f64],
) -> Result<ModeReport> {
    let min_delta = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    let upto = (2.0 / min_delta).ceil() as usize;
    let indices = seq.extended_indices(upto.min(1 << 14));
    let mut curve = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut sup = Extended::ZERO;
        for &n in &indices {
            let f = seq.term(n);
            let s = ac_modulus(&seq.space, &f, p, &[delta], INT_TOL)?;
            let w = &s.samples[0].omega;
            if w.value_or_inf() > sup.value_or_inf() {
                sup = *w;
            }
        }
        curve.push((delta, sup.value_or_inf()));
    }
    // verdict on the curve ordered by decreasing δ
    let mut ordered = curve.clone();
    ordered.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let u_first = ordered.first().map(|&(_, u)| u).unwrap_or(0.0);
    let u_last = ordered.last().map(|&(_, u)| u).unwrap_or(0.0);
    let tol = DEFAULT_TOL;
    let verdict = if u_last < tol || (u_last.is_finite() && u_last <= 0.25 * u_first) {
        Verdict::Holds
    } else if u_last >= 10.0 * tol && u_last >= 0.9 * u_first {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    let mut report = ModeReport::new("uniformly_p_integrable", verdict, curve);
    report.detail = Some(format!("index sample up to n = {}", indices.last().unwrap()));
    Ok(report)
}

/// sup_n ‖f_n χ_{E^c}‖_{α_p} over the tail beyond a prefix of size K.
fn tightness_residual(seq: &FnSequence, p: f64, head: u64, alpha: bool) -> Result<f64> {
    let start = match seq.space.tail.start() {
        Some(s) => s,
        None => return Ok(0.0), // finite space: E = X leaves nothing
    };
    let beyond = MeasurableSet::tail_from(start + head);
    let mut sup = 0.0f64;
    for n in seq.indices() {
        let f = seq.term(n);
        let g = if alpha { f.min_one() } else { f };
        let v = integrate_p(&seq.space, &g, p, &beyond, INT_TOL)?
            .powf(1.0 / p)
            .value_or_inf();
        sup = sup.max(v);
    }
    Ok(sup)
}

/// ∀ε ∃ finite-measure E with sup_n ‖f_n χ_{E^c}‖_{α_p} < ε
/// (with `alpha = false`: the L_p tail control of the classical Vitali
/// theorem, sup_n ‖f_n χ_{E^c}‖_p < ε).
pub fn check_tightness(
    seq: &FnSequence,
    p: f64,
    epsilons: &[f64],
    alpha: bool,
) -> Result<ModeReport> {
    let mode = if alpha { "alpha_tight" } else { "lp_tight" };
    if !seq.space.has_tail() {
        let mut r = ModeReport::new(mode, Verdict::Holds, vec![]);
        r.witnesses = vec!["E = X (finite measure space)".into()];
        r.detail = Some("tightness is automatic on finite measure spaces".into());
        return Ok(r);
    }
    // prefix heads of doubling size, capped at N_max/2 so the index
    // horizon can still exhibit escape from the largest candidate
    let mut heads = vec![0u64];
    let mut k = 1u64;
    while k <= (seq.n_max / 2) as u64 {
        heads.push(k);
        k *= 2;
    }
    let residuals: Vec<f64> = heads
        .iter()
        .map(|&h| tightness_residual(seq, p, h, alpha))
        .collect::<Result<_>>()?;
    let trace: Vec<(f64, f64)> = heads
        .iter()
        .zip(&residuals)
        .map(|(&h, &r)| (h as f64, r))
        .collect();
    let mut witnesses = Vec::new();
    let mut verdicts = Vec::new();
    for &eps in epsilons {
        match heads.iter().zip(&residuals).find(|(_, &r)| r < eps) {
            Some((&h, _)) => {
                witnesses.push(format!("eps={eps}: E = cells + first {h} tail atoms"));
                verdicts.push(Verdict::Holds);
            }
            None => {
                let first = residuals.first().copied().unwrap_or(0.0);
                let last = residuals.last().copied().unwrap_or(0.0);
                verdicts.push(if last >= 0.9 * first && last >= eps {
                    Verdict::Fails
                } else {
                    Verdict::Inconclusive
                });
            }
        }
    }
    let mut report = ModeReport::new(mode, Verdict::all(verdicts), trace);
    report.witnesses = witnesses;
    Ok(report)
}

pub fn check_alpha_tightness(seq: &FnSequence, p: f64, epsilons: &[f64]) -> Result<ModeReport> {
    check_tightness(seq, p, epsilons, true)
}

/// Pointwise convergence on cells and early tail atoms; cells marked
/// unresolved by the model and atoms beyond N_max/4 are excluded.
pub fn check_ae(seq: &FnSequence, tol: f64) -> Result<ModeReport> {
    let mut failing_mass = 0.0f64;
    let mut inconclusive = false;
    let mut trace = Vec::new();
    let diffs: Vec<MeasurableFn> = seq
        .indices()
        .into_iter()
        .map(|n| seq.diff(n))
        .collect::<Result<_>>()?;
    for c in &seq.space.cells {
        if seq.unresolved_cells.contains(&c.id) || c.weight == 0.0 {
            continue;
        }
        let per: Vec<f64> = diffs.iter().map(|d| d.value(c.id).abs()).collect();
        match trace_verdict(&per, tol) {
            Verdict::Holds => {}
            Verdict::Fails => failing_mass += c.weight,
            Verdict::Inconclusive => inconclusive = true,
        }
        trace.push((c.id as f64, *per.last().unwrap()));
    }
    if let Some(start) = seq.space.tail.start() {
        let horizon = (seq.n_max / 4).max(1) as u64;
        for n in start..start + horizon {
            let per: Vec<f64> = diffs.iter().map(|d| d.tail_value(n).abs()).collect();
            match trace_verdict(&per, tol) {
                Verdict::Holds => {}
                Verdict::Fails => failing_mass += seq.space.tail.atom_weight(n),
                Verdict::Inconclusive => inconclusive = true,
            }
        }
    }
    let verdict = if failing_mass > 0.0 {
        Verdict::Fails
    } else if inconclusive {
        Verdict::Inconclusive
    } else {
        Verdict::Holds
    };
    let mut report = ModeReport::new("ae", verdict, trace);
    report.detail = Some(format!(
        "failing mass {failing_mass:.6}; unresolved cells and far tail atoms excluded"
    ));
    Ok(report)
}

/// Structured Vitali report: hypothesis legs vs conclusion, with the
/// biconditional consistency assertion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VitaliReport {
    pub variant: String,
    pub legs: Vec<ModeReport>,
    pub conclusion: ModeReport,
    pub consistent: bool,
    pub note: Option<String>,
}

fn biconditional_consistent(legs: &[&ModeReport], conclusion: &ModeReport) -> bool {
    let all_hold = legs.iter().all(|l| l.verdict == Verdict::Holds);
    let any_fail = legs.iter().any(|l| l.verdict == Verdict::Fails);
    match conclusion.verdict {
        Verdict::Holds => !any_fail,
        Verdict::Fails => !all_hold,
        Verdict::Inconclusive => true,
    }
}

const TIGHT_EPS: [f64; 3] = [0.5, 0.1, 0.01];

/// Default δ budgets for the almost-L_p witness search; the smallest is
/// tied to the index horizon so convergence outside the witness set can
/// still manifest within it.
pub fn default_almost_deltas(n_max: usize) -> Vec<f64> {
    vec![0.5, 0.1, 4.0 / n_max as f64]
}

/// Classical Vitali: L_p-convergence ⟺ in-measure + L_p tail control +
/// uniform p-integrability.
pub fn vitali_classic(seq: &FnSequence, p: f64, tol: f64) -> Result<VitaliReport> {
    let grid = default_delta_grid();
    let legs = vec![
        check_in_measure(seq, &grid, tol)?,
        check_tightness(seq, p, &TIGHT_EPS, false)?,
        check_uniform_p_integrability(seq, p, &grid)?,
    ];
    let conclusion = check_lp(seq, p, tol)?;
    let consistent = biconditional_consistent(&legs.iter().collect::<Vec<_>>(), &conclusion);
    let note = (!seq.space.has_tail())
        .then(|| "finite measure space: tail control automatic with E = X".to_string());
    Ok(VitaliReport {
        variant: "classic".into(),
        legs,
        conclusion,
        consistent,
        note,
    })
}

/// α_p + uniform p-integrability ⟺ L_p-convergence.
pub fn vitali_alpha(seq: &FnSequence, p: f64, tol: f64) -> Result<VitaliReport> {
    let grid = default_delta_grid();
    let legs = vec![
        check_alpha(seq, p, tol)?,
        check_uniform_p_integrability(seq, p, &grid)?,
    ];
    let conclusion = check_lp(seq, p, tol)?;
    let consistent = biconditional_consistent(&legs.iter().collect::<Vec<_>>(), &conclusion);
    Ok(VitaliReport {
        variant: "alpha".into(),
        legs,
        conclusion,
        consistent,
        note: None,
    })
}

/// Local-in-measure + α-tightness ⟺ α_p-convergence.
pub fn vitali_lambda(seq: &FnSequence, p: f64, tol: f64) -> Result<VitaliReport> {
    let grid = default_delta_grid();
    let legs = vec![
        check_local_in_measure(seq, None, &grid, tol)?,
        check_alpha_tightness(seq, p, &TIGHT_EPS)?,
    ];
    let conclusion = check_alpha(seq, p, tol)?;
    let consistent = biconditional_consistent(&legs.iter().collect::<Vec<_>>(), &conclusion);
    let note = (!seq.space.has_tail())
        .then(|| "finite measure space: alpha-tightness automatic with E = X".to_string());
    Ok(VitaliReport {
        variant: "lambda".into(),
        legs,
        conclusion,
        consistent,
        note,
    })
}

/// Dominated convergence: sup_n |f_n| ≤ g with g ∈ Λ_p forces
/// ‖f_n − f‖_{α_p} → 0 (given pointwise convergence), and signed
/// integrals converge outside the membership witness of g.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominatedReport {
    pub ae: ModeReport,
    pub alpha: ModeReport,
    pub integral_trace: Vec<(f64, f64)>,
    pub integral_verdict: Verdict,
    pub consistent: bool,
}

pub fn dominated_convergence_suite(
    seq: &FnSequence,
    p: f64,
    g: &MeasurableFn,
    tol: f64,
) -> Result<DominatedReport> {
    // domination on cells
    for c in &seq.space.cells {
        for n in seq.indices() {
            if seq.term(n).value(c.id).abs() > g.value(c.id).abs() + 1e-12 {
                return Err(AlpError::DominationViolated { cell: c.id });
            }
        }
    }
    // domination on sampled tail atoms
    if let Some(start) = seq.space.tail.start() {
        for atom in start..start + 256 {
            for n in seq.indices() {
                if seq.term(n).tail_value(atom).abs() > g.tail_value(atom).abs() + 1e-12 {
                    return Err(AlpError::DominationViolated {
                        cell: atom as usize,
                    });
                }
            }
        }
    }
    let membership = lambda_p_member(&seq.space, g, p, &[0.1], INT_TOL)?;
    if membership.verdict == Membership::NonMember {
        return Err(AlpError::NotMember);
    }
    let ae = check_ae(seq, tol)?;
    let alpha = check_alpha(seq, p, tol)?;

    // ∫_{E^c} f_n → ∫_{E^c} f on the witness set of g
    let witness = membership
        .witnesses
        .first()
        .map(|(_, w)| w.clone())
        .unwrap_or_else(MeasurableSet::empty);
    let compl = witness.complement(&seq.space);
    let limit = seq.limit.as_ref().ok_or(AlpError::MissingLimit)?;
    let target = integrate_signed_complement(&seq.space, limit, &compl, INT_TOL)?.value_or_inf();
    let mut integral_trace = Vec::new();
    for n in seq.indices() {
        let v =
            integrate_signed_complement(&seq.space, &seq.term(n), &compl, INT_TOL)?.value_or_inf();
        integral_trace.push((n as f64, (v - target).abs()));
    }
    let integral_verdict = trace_verdict(&values_of(&integral_trace), tol);
    // the theorem promises the conclusion when the hypotheses hold
    let consistent = !(ae.verdict == Verdict::Holds
        && (alpha.verdict == Verdict::Fails || integral_verdict == Verdict::Fails));
    Ok(DominatedReport {
        ae,
        alpha,
        integral_trace,
        integral_verdict,
        consistent,
    })
}

/// All checkers plus the one-way implication lattice
/// Lp ⇒ almost_Lp ⇒ alpha_p ⇒ in_measure ⇒ local_in_measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixReport {
    pub modes: Vec<ModeReport>,
    pub consistent: bool,
}

pub fn implication_matrix(seq: &FnSequence, p: f64, tol: f64) -> Result<MatrixReport> {
    let grid = default_delta_grid();
    let modes = vec![
        check_lp(seq, p, tol)?,
        check_almost_lp(seq, p, &default_almost_deltas(seq.n_max), tol)?,
        check_alpha(seq, p, tol)?,
        check_in_measure(seq, &grid, tol)?,
        check_local_in_measure(seq, None, &grid, tol)?,
    ];
    for w in modes.windows(2) {
        if w[0].verdict == Verdict::Holds && w[1].verdict == Verdict::Fails {
            return Err(AlpError::ImplicationViolation {
                upstream: w[0].mode.clone(),
                downstream: w[1].mode.clone(),
            });
        }
    }
    Ok(MatrixReport {
        modes,
        consistent: true,
    })
}

/// Full per-mode convergence report over all checkers.
pub fn full_report(seq: &FnSequence, p: f64, tol: f64) -> Result<Vec<ModeReport>> {
    let grid = default_delta_grid();
    let mut out = vec![
        check_lp(seq, p, tol)?,
        check_almost_lp(seq, p, &default_almost_deltas(seq.n_max), tol)?,
        check_alpha(seq, p, tol)?,
        check_alpha_cauchy(seq, p, tol)?,
        check_in_measure(seq, &grid, tol)?,
        check_local_in_measure(seq, None, &grid, tol)?,
        check_ae(seq, tol)?,
        check_uniform_p_integrability(seq, p, &grid)?,
        check_alpha_tightness(seq, p, &TIGHT_EPS)?,
    ];
    // lattice consistency is asserted post-hoc on every report
    let order = ["Lp", "almost_Lp", "alpha_p", "in_measure", "local_in_measure"];
    for pair in order.windows(2) {
        let up = out.iter().find(|m| m.mode == pair[0]).unwrap().verdict;
        let down = out.iter().find(|m| m.mode == pair[1]).unwrap().verdict;
        if up == Verdict::Holds && down == Verdict::Fails {
            return Err(AlpError::ImplicationViolation {
                upstream: pair[0].into(),
                downstream: pair[1].into(),
            });
        }
    }
    out.sort_by(|a, b| a.mode.cmp(&b.mode));
    Ok(out)
}

fn values_of(trace: &[(f64, f64)]) -> Vec<f64> {
    trace.iter().map(|&(_, v)| v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: f64 = 1.0;
    const TOL: f64 = DEFAULT_TOL;

    fn nchi() -> FnSequence {
        FnSequence::n_chi_shrinking(DEFAULT_N_MAX)
    }
    fn chi() -> FnSequence {
        FnSequence::chi_shrinking(DEFAULT_N_MAX)
    }
    fn boxes() -> FnSequence {
        FnSequence::escaping_box(DEFAULT_N_MAX)
    }

    #[test]
    fn shrinking_model_is_exact() {
        let seq = nchi();
        // ∫ |f_n| = n · (1/n) = 1 exactly
        for n in [1, 2, 10, 64] {
            let f = seq.term(n);
            let v = integrate_p_whole(&seq.space, &f, 1.0, 1e-12)
                .unwrap()
                .value_or_inf();
            assert!((v - 1.0).abs() < 1e-9, "n={n}: ∫ = {v}");
        }
    }

    #[test]
    fn trace_verdict_regimes() {
        let decay: Vec<f64> = (1..=64).map(|n| 1.0 / n as f64).collect();
        assert_eq!(trace_verdict(&decay, TOL), Verdict::Holds);
        let flat = vec![1.0; 64];
        assert_eq!(trace_verdict(&flat, TOL), Verdict::Fails);
        let tiny = vec![1e-9; 64];
        assert_eq!(trace_verdict(&tiny, TOL), Verdict::Holds);
        let slow: Vec<f64> = (1..=64).map(|n| 1.0 / (n as f64).ln().max(1.0)).collect();
        assert_eq!(trace_verdict(&slow, TOL), Verdict::Inconclusive);
    }

    #[test]
    fn lp_verdicts_for_canonical_sequences() {
        assert_eq!(check_lp(&nchi(), P, TOL).unwrap().verdict, Verdict::Fails);
        assert_eq!(check_lp(&chi(), P, TOL).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_lp(&boxes(), P, TOL).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn alpha_verdicts_for_canonical_sequences() {
        assert_eq!(check_alpha(&nchi(), P, TOL).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_alpha(&chi(), P, TOL).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_alpha(&boxes(), P, TOL).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn alpha_cauchy_verdicts() {
        assert_eq!(
            check_alpha_cauchy(&chi(), P, TOL).unwrap().verdict,
            Verdict::Holds
        );
        assert_eq!(
            check_alpha_cauchy(&boxes(), P, TOL).unwrap().verdict,
            Verdict::Fails
        );
        let space = MeasureSpace::finite(&[1.0]).unwrap();
        let f = MeasurableFn::dense(&[2.0]);
        let seq = FnSequence::constant(space, f, DEFAULT_N_MAX);
        assert_eq!(
            check_alpha_cauchy(&seq, P, TOL).unwrap().verdict,
            Verdict::Holds
        );
    }

    #[test]
    fn in_measure_verdicts() {
        let grid = default_delta_grid();
        assert_eq!(
            check_in_measure(&nchi(), &grid, TOL).unwrap().verdict,
            Verdict::Holds
        );
        assert_eq!(
            check_in_measure(&boxes(), &grid, TOL).unwrap().verdict,
            Verdict::Fails
        );
    }

    #[test]
    fn local_in_measure_typewriter_holds() {
        let grid = default_delta_grid();
        assert_eq!(
            check_local_in_measure(&boxes(), None, &grid, TOL)
                .unwrap()
                .verdict,
            Verdict::Holds
        );
    }

    #[test]
    fn local_in_measure_alternating_fails() {
        let space = MeasureSpace::finite(&[0.3, 0.7]).unwrap();
        let a = MeasurableFn::dense(&[1.0, 0.0]);
        let b = a.scale(2.0);
        let terms: Vec<MeasurableFn> = (0..DEFAULT_N_MAX)
            .map(|i| if i % 2 == 0 { a.clone() } else { b.clone() })
            .collect();
        let mut seq = FnSequence::explicit(space, terms, Some(a)).unwrap();
        seq.n_max = DEFAULT_N_MAX;
        let grid = default_delta_grid();
        assert_eq!(
            check_local_in_measure(&seq, None, &grid, TOL).unwrap().verdict,
            Verdict::Fails
        );
    }

    #[test]
    fn almost_lp_verdicts() {
        let deltas = default_almost_deltas(DEFAULT_N_MAX);
        assert_eq!(
            check_almost_lp(&nchi(), P, &deltas, TOL).unwrap().verdict,
            Verdict::Holds
        );
        assert_eq!(
            check_almost_lp(&boxes(), P, &deltas, TOL).unwrap().verdict,
            Verdict::Fails
        );
    }

    #[test]
    fn uniform_integrability_verdicts() {
        let grid = default_delta_grid();
        assert_eq!(
            check_uniform_p_integrability(&nchi(), P, &grid)
                .unwrap()
                .verdict,
            Verdict::Fails
        );
        assert_eq!(
            check_uniform_p_integrability(&chi(), P, &grid)
                .unwrap()
                .verdict,
            Verdict::Holds
        );
        assert_eq!(
            check_uniform_p_integrability(&boxes(), P, &grid)
                .unwrap()
                .verdict,
            Verdict::Holds
        );
    }

    #[test]
    fn tightness_verdicts() {
        assert_eq!(
            check_alpha_tightness(&boxes(), P, &TIGHT_EPS).unwrap().verdict,
            Verdict::Fails
        );
        assert_eq!(
            check_alpha_tightness(&nchi(), P, &TIGHT_EPS).unwrap().verdict,
            Verdict::Holds
        );
    }

    #[test]
    fn ae_verdicts() {
        assert_eq!(check_ae(&nchi(), TOL).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_ae(&boxes(), TOL).unwrap().verdict, Verdict::Holds);
        // alternating sequence diverges pointwise on a positive-mass cell
        let space = MeasureSpace::finite(&[0.3, 0.7]).unwrap();
        let a = MeasurableFn::dense(&[1.0, 0.0]);
        let b = a.scale(2.0);
        let terms: Vec<MeasurableFn> = (0..DEFAULT_N_MAX)
            .map(|i| if i % 2 == 0 { a.clone() } else { b.clone() })
            .collect();
        let seq = FnSequence::explicit(space, terms, Some(a)).unwrap();
        assert_eq!(check_ae(&seq, TOL).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn vitali_triptych_patterns() {
        for (seq, lp) in [
            (chi(), Verdict::Holds),
            (nchi(), Verdict::Fails),
            (boxes(), Verdict::Fails),
        ] {
            let classic = vitali_classic(&seq, P, TOL).unwrap();
            assert_eq!(classic.conclusion.verdict, lp);
            assert!(classic.consistent, "classic on {:?}", seq.kind);
            let alpha = vitali_alpha(&seq, P, TOL).unwrap();
            assert!(alpha.consistent, "alpha on {:?}", seq.kind);
            let lambda = vitali_lambda(&seq, P, TOL).unwrap();
            assert!(lambda.consistent, "lambda on {:?}", seq.kind);
        }
        // leg patterns: nchi fails UI leg in the alpha variant
        let a = vitali_alpha(&nchi(), P, TOL).unwrap();
        assert_eq!(a.legs[0].verdict, Verdict::Holds);
        assert_eq!(a.legs[1].verdict, Verdict::Fails);
        // escaping box: local holds, tightness fails, alpha fails
        let l = vitali_lambda(&boxes(), P, TOL).unwrap();
        assert_eq!(l.legs[0].verdict, Verdict::Holds);
        assert_eq!(l.legs[1].verdict, Verdict::Fails);
        assert_eq!(l.conclusion.verdict, Verdict::Fails);
    }

    #[test]
    fn dominated_convergence_scaled_member() {
        // g on 2^-n weights with values 2^n is in Λ_1 \ L_1;
        // f_n = (1/n) g α-converges to 0
        let space = MeasureSpace::new(
            vec![],
            TailFamily::Geometric {
                a: 1.0,
                r: 0.5,
                start: 1,
            },
        )
        .unwrap();
        let g = MeasurableFn::zero().with_tail(ValueFamily::Geometric { b: 1.0, q: 2.0 }, 1);
        let terms: Vec<MeasurableFn> = (1..=DEFAULT_N_MAX)
            .map(|n| g.scale(1.0 / n as f64))
            .collect();
        let seq = FnSequence::explicit(space, terms, Some(MeasurableFn::zero())).unwrap();
        let rep = dominated_convergence_suite(&seq, 1.0, &g, TOL).unwrap();
        assert_eq!(rep.alpha.verdict, Verdict::Holds);
        assert!(rep.consistent);
    }

    #[test]
    fn dominated_convergence_rejects_violation() {
        let space = MeasureSpace::finite(&[1.0]).unwrap();
        let f = MeasurableFn::dense(&[2.0]);
        let g = MeasurableFn::dense(&[1.0]);
        let seq = FnSequence::constant(space, f, 8);
        assert!(matches!(
            dominated_convergence_suite(&seq, 1.0, &g, TOL),
            Err(AlpError::DominationViolated { cell: 0 })
        ));
    }

    #[test]
    fn implication_matrix_canonical() {
        // nchi: Lp fails, rest hold; boxes: only local holds
        let m = implication_matrix(&nchi(), P, TOL).unwrap();
        assert!(m.consistent);
        assert_eq!(m.modes[0].verdict, Verdict::Fails);
        for mode in &m.modes[1..] {
            assert_eq!(mode.verdict, Verdict::Holds, "mode {}", mode.mode);
        }
        let m = implication_matrix(&boxes(), P, TOL).unwrap();
        let by_name = |name: &str| m.modes.iter().find(|x| x.mode == name).unwrap().verdict;
        assert_eq!(by_name("Lp"), Verdict::Fails);
        assert_eq!(by_name("alpha_p"), Verdict::Fails);
        assert_eq!(by_name("local_in_measure"), Verdict::Holds);
    }

    #[test]
    fn constant_sequence_all_hold() {
        let space = MeasureSpace::finite(&[0.4, 0.6]).unwrap();
        let f = MeasurableFn::dense(&[0.5, 2.0]);
        let seq = FnSequence::constant(space, f, DEFAULT_N_MAX);
        for mode in full_report(&seq, 2.0, TOL).unwrap() {
            assert_eq!(mode.verdict, Verdict::Holds, "mode {}", mode.mode);
        }
    }

    #[test]
    fn sequence_json_round_trip() {
        let seq = FnSequence::from_json(r#"{"family":"escaping_box","n_max":32}"#).unwrap();
        assert_eq!(seq.n_max, 32);
        assert!(FnSequence::from_json(r#"{"family":"nope"}"#).is_err());
    }
}
