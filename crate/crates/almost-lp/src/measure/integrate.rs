//! Integration engine: exact weighted sums over the finite partition,
//! analytically bounded series over tail atoms.

use super::extended::Extended;
use super::func::{MeasurableFn, TailRange, TailSegment};
use super::series::{max_tail_terms, GeoPow};
use super::space::{ComplementSet, MeasurableSet, MeasureSpace};
use crate::error::Result;

/// Default absolute tolerance for tail partial sums.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Canonical series for `w(n) * |f|(n)^p` on one clipped segment.
fn segment_geopow(space: &MeasureSpace, seg: &TailSegment, p: f64) -> GeoPow {
    let w = space.tail.weight_geopow();
    let (c, r, s) = seg.family.pow_contribution(p);
    GeoPow::new(w.coef * c, w.ratio * r, w.sigma + s)
}

/// ∫ |f|^p over the tail atoms in [lo, hi).
fn tail_integral_range(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    lo: u64,
    hi: Option<u64>,
    tol: f64,
) -> Result<Extended> {
    let start = match space.tail.start() {
        Some(s) => s,
        None => return Ok(Extended::ZERO),
    };
    let mut total = Extended::ZERO;
    let budget = tol / (f.tail.len().max(1) as f64);
    for seg in &f.tail {
        if let Some(clipped) = seg.clip(lo.max(start), hi) {
            let gp = segment_geopow(space, &clipped, p);
            let part = match clipped.hi {
                Some(h) => gp.sum_range(clipped.lo, h, budget, max_tail_terms())?,
                None => gp.sum_from(clipped.lo, budget, max_tail_terms())?,
            };
            total = total.add(part);
        }
    }
    Ok(total)
}

/// ∫_over |f|^p dμ. Exact on the finite part; tail decided analytically
/// with a reported absolute-error bound.
pub fn integrate_p(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    over: &MeasurableSet,
    tol: f64,
) -> Result<Extended> {
    let mut finite = 0.0;
    for (&id, &v) in &f.values {
        let frac = over.fraction_of(id);
        if frac > 0.0 {
            if let Some(cell) = space.cell(id) {
                finite += frac * cell.weight * v.abs().powf(p);
            }
        }
    }
    let tail = match over.tail_lo(space) {
        Some(lo) => tail_integral_range(space, f, p, lo, None, tol)?,
        None => Extended::ZERO,
    };
    Ok(Extended::exact(finite).add(tail))
}

/// ∫ |f|^p over the whole space.
pub fn integrate_p_whole(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    tol: f64,
) -> Result<Extended> {
    integrate_p(space, f, p, &space.whole(), tol)
}

/// ∫ |f|^p over the complement of a set (handles tail head ranges).
pub fn integrate_p_complement(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    compl: &ComplementSet,
    tol: f64,
) -> Result<Extended> {
    let mut total = integrate_p(space, f, p, &compl.set, tol)?;
    if let Some((lo, hi)) = compl.tail_head {
        total = total.add(tail_integral_range(space, f, p, lo, Some(hi), tol)?);
    }
    Ok(total)
}

/// Signed ∫ f dμ over a set (p = 1 semantics, used by dominated convergence).
pub fn integrate_signed(
    space: &MeasureSpace,
    f: &MeasurableFn,
    over: &MeasurableSet,
    tol: f64,
) -> Result<Extended> {
    let mut finite = 0.0;
    for (&id, &v) in &f.values {
        let frac = over.fraction_of(id);
        if frac > 0.0 {
            if let Some(cell) = space.cell(id) {
                finite += frac * cell.weight * v;
            }
        }
    }
    let mut total = Extended::exact(finite);
    if let Some(lo) = over.tail_lo(space) {
        let budget = tol / (f.tail.len().max(1) as f64);
        for seg in &f.tail {
            if let Some(clipped) = seg.clip(lo, None) {
                let gp = segment_geopow(space, &clipped, 1.0);
                let part = match clipped.hi {
                    Some(h) => gp.sum_range(clipped.lo, h, budget, max_tail_terms())?,
                    None => gp.sum_from(clipped.lo, budget, max_tail_terms())?,
                };
                total = total.add(part.scale(clipped.sign as f64));
            }
        }
    }
    Ok(total)
}

/// Signed ∫ f over the complement of a set.
pub fn integrate_signed_complement(
    space: &MeasureSpace,
    f: &MeasurableFn,
    compl: &ComplementSet,
    tol: f64,
) -> Result<Extended> {
    let mut total = integrate_signed(space, f, &compl.set, tol)?;
    if let Some((lo, hi)) = compl.tail_head {
        let budget = tol / (f.tail.len().max(1) as f64);
        for seg in &f.tail {
            if let Some(clipped) = seg.clip(lo, Some(hi)) {
                let gp = segment_geopow(space, &clipped, 1.0);
                let part = gp.sum_range(
                    clipped.lo,
                    clipped.hi.unwrap(),
                    budget,
                    max_tail_terms(),
                )?;
                total = total.add(part.scale(clipped.sign as f64));
            }
        }
    }
    Ok(total)
}

/// μ(|f| > threshold), threshold > 0.
pub fn measure_of(
    space: &MeasureSpace,
    f: &MeasurableFn,
    threshold: f64,
    tol: f64,
) -> Result<Extended> {
    debug_assert!(threshold > 0.0);
    let mut finite = 0.0;
    for (&id, &v) in &f.values {
        if v.abs() > threshold {
            if let Some(cell) = space.cell(id) {
                finite += cell.weight;
            }
        }
    }
    let mut total = Extended::exact(finite);
    if let Some(start) = space.tail.start() {
        for seg in &f.tail {
            if let Some(clipped) = seg.clip(start, None) {
                let range = seg.family.superlevel(threshold, clipped.lo, clipped.hi);
                let part = match range {
                    TailRange::Empty => Extended::ZERO,
                    TailRange::Bounded { lo, hi } => space.tail.mass_range(lo, hi, tol)?,
                    TailRange::Unbounded { lo } => space.tail.mass_from(lo, tol)?,
                };
                total = total.add(part);
            }
        }
    }
    Ok(total)
}

/// μ({|f| > 0}), the measure of the support (limit of measure_of as δ ↓ 0).
pub fn support_measure(space: &MeasureSpace, f: &MeasurableFn, tol: f64) -> Result<Extended> {
    let mut finite = 0.0;
    for (&id, &v) in &f.values {
        if v != 0.0 {
            if let Some(cell) = space.cell(id) {
                finite += cell.weight;
            }
        }
    }
    let mut total = Extended::exact(finite);
    if let Some(start) = space.tail.start() {
        for seg in &f.tail {
            if seg.family.is_zero() {
                continue;
            }
            if let Some(clipped) = seg.clip(start, None) {
                let part = match clipped.hi {
                    Some(h) => space.tail.mass_range(clipped.lo, h, tol)?,
                    None => space.tail.mass_from(clipped.lo, tol)?,
                };
                total = total.add(part);
            }
        }
    }
    Ok(total)
}

/// Pointwise min(|f|, 1).
pub fn pointwise_min_one(f: &MeasurableFn) -> MeasurableFn {
    f.min_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::func::ValueFamily;
    use crate::measure::space::TailFamily;

    fn three_cells() -> MeasureSpace {
        MeasureSpace::finite(&[0.1, 0.2, 0.7]).unwrap()
    }

    #[test]
    fn zero_function_integrates_to_zero() {
        let space = three_cells();
        let z = MeasurableFn::zero();
        let v = integrate_p_whole(&space, &z, 1.0, 1e-12).unwrap();
        assert_eq!(v, Extended::ZERO);
    }

    #[test]
    fn weighted_sum_matches_hand_computation() {
        // f = (3, 1, 0.5) on weights (0.1, 0.2, 0.7), p = 1 → 0.85
        let space = three_cells();
        let f = MeasurableFn::dense(&[3.0, 1.0, 0.5]);
        let v = integrate_p_whole(&space, &f, 1.0, 1e-12).unwrap();
        assert!((v.value_or_inf() - 0.85).abs() < 1e-15);
        // brute-force loop oracle
        let brute: f64 = [(3.0, 0.1), (1.0, 0.2), (0.5, 0.7)]
            .iter()
            .map(|(v, w): &(f64, f64)| v * w)
            .sum();
        assert!((v.value_or_inf() - brute).abs() < 1e-15);
    }

    #[test]
    fn basel_tail_within_tolerance() {
        // constant-weight-1 tail from 1, values 1/n, p = 2 → pi^2/6
        let space = MeasureSpace::new(vec![], TailFamily::Constant { c: 1.0, start: 1 }).unwrap();
        let f = MeasurableFn::zero().with_tail(ValueFamily::Power { b: 1.0, t: 1.0 }, 1);
        let v = integrate_p_whole(&space, &f, 2.0, 1e-8).unwrap();
        let target = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        assert!((v.value_or_inf() - target).abs() < 1e-8 + v.abs_err());
    }

    #[test]
    fn geometric_weight_times_geometric_value_finiteness() {
        // weights 2^-n, values 2^(n/p): r q^p = 1 → infinite
        let space = MeasureSpace::new(
            vec![],
            TailFamily::Geometric {
                a: 1.0,
                r: 0.5,
                start: 1,
            },
        )
        .unwrap();
        let p = 2.0;
        let f = MeasurableFn::zero().with_tail(
            ValueFamily::Geometric {
                b: 1.0,
                q: 2f64.powf(1.0 / p),
            },
            1,
        );
        assert_eq!(
            integrate_p_whole(&space, &f, p, 1e-10).unwrap(),
            Extended::Infinite
        );
        // but r q^p < 1 converges
        let g = MeasurableFn::zero().with_tail(ValueFamily::Geometric { b: 1.0, q: 1.2 }, 1);
        assert!(integrate_p_whole(&space, &g, 1.0, 1e-10)
            .unwrap()
            .is_finite());
    }

    #[test]
    fn measure_of_examples() {
        let space = three_cells();
        let z = MeasurableFn::zero();
        assert_eq!(measure_of(&space, &z, 0.5, 1e-12).unwrap(), Extended::ZERO);

        let f = MeasurableFn::dense(&[3.0, 1.0, 0.5]);
        let m = measure_of(&space, &f, 0.9, 1e-12).unwrap();
        assert!((m.value_or_inf() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn measure_of_tail_crossing() {
        // constant-weight-1 tail, values 2^-n, threshold 0.1 → measure 3
        let space = MeasureSpace::new(vec![], TailFamily::Constant { c: 1.0, start: 1 }).unwrap();
        let f = MeasurableFn::zero().with_tail(ValueFamily::Geometric { b: 1.0, q: 0.5 }, 1);
        let m = measure_of(&space, &f, 0.1, 1e-12).unwrap();
        assert!((m.value_or_inf() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn min_one_examples() {
        let f = MeasurableFn::dense(&[3.0, 1.0, 0.5]);
        let m = pointwise_min_one(&f);
        assert_eq!(m.value(0), 1.0);
        assert_eq!(m.value(1), 1.0);
        assert_eq!(m.value(2), 0.5);

        // power values 1/n are already <= 1: unchanged
        let g = MeasurableFn::zero().with_tail(ValueFamily::Power { b: 1.0, t: 1.0 }, 1);
        let mg = pointwise_min_one(&g);
        for n in [1u64, 2, 5, 100] {
            assert_eq!(mg.tail_value(n), g.tail_value(n));
        }
    }

    #[test]
    fn additivity_over_disjoint_sets() {
        let space = three_cells();
        let f = MeasurableFn::dense(&[3.0, 1.0, 0.5]);
        let a = MeasurableSet::of_cells([0]);
        let b = MeasurableSet::of_cells([1, 2]);
        let whole = space.whole();
        let ia = integrate_p(&space, &f, 2.0, &a, 1e-12).unwrap().value_or_inf();
        let ib = integrate_p(&space, &f, 2.0, &b, 1e-12).unwrap().value_or_inf();
        let iw = integrate_p(&space, &f, 2.0, &whole, 1e-12)
            .unwrap()
            .value_or_inf();
        assert!((ia + ib - iw).abs() < 1e-15);
    }
}
