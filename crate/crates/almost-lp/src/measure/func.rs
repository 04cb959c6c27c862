use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AlpError, Result};

/// Magnitude family for |f| on tail atoms; `b >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ValueFamily {
    Zero,
    /// |f|(n) = b
    Constant { b: f64 },
    /// |f|(n) = b * q^n  (q < 1 decay, q > 1 growth)
    Geometric { b: f64, q: f64 },
    /// |f|(n) = b * n^(-t)  (t > 0 decay, t < 0 growth)
    Power { b: f64, t: f64 },
}

impl ValueFamily {
    pub fn magnitude(&self, n: u64) -> f64 {
        match *self {
            ValueFamily::Zero => 0.0,
            ValueFamily::Constant { b } => b,
            ValueFamily::Geometric { b, q } => b * q.powf(n as f64),
            ValueFamily::Power { b, t } => b * (n as f64).powf(-t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            ValueFamily::Zero => true,
            ValueFamily::Constant { b } => b == 0.0,
            ValueFamily::Geometric { b, .. } => b == 0.0,
            ValueFamily::Power { b, .. } => b == 0.0,
        }
    }

    /// Contribution of |f|^p in canonical form: multiplies the weight
    /// family's coefficient/ratio and adds to its power exponent.
    pub fn pow_contribution(&self, p: f64) -> (f64, f64, f64) {
        match *self {
            ValueFamily::Zero => (0.0, 1.0, 0.0),
            ValueFamily::Constant { b } => (b.powf(p), 1.0, 0.0),
            ValueFamily::Geometric { b, q } => (b.powf(p), q.powf(p), 0.0),
            ValueFamily::Power { b, t } => (b.powf(p), 1.0, p * t),
        }
    }

    /// Is |f| non-increasing in n?
    pub fn non_increasing(&self) -> bool {
        match *self {
            ValueFamily::Zero | ValueFamily::Constant { .. } => true,
            ValueFamily::Geometric { q, .. } => q <= 1.0,
            ValueFamily::Power { t, .. } => t >= 0.0,
        }
    }

    /// sup of |f| over n >= lo; infinite for growing families.
    pub fn sup_from(&self, lo: u64) -> f64 {
        if self.non_increasing() {
            self.magnitude(lo.max(1))
        } else {
            f64::INFINITY
        }
    }

    /// Scale the magnitude by c >= 0.
    pub fn scaled(&self, c: f64) -> ValueFamily {
        debug_assert!(c >= 0.0);
        if c == 0.0 {
            return ValueFamily::Zero;
        }
        match *self {
            ValueFamily::Zero => ValueFamily::Zero,
            ValueFamily::Constant { b } => ValueFamily::Constant { b: c * b },
            ValueFamily::Geometric { b, q } => ValueFamily::Geometric { b: c * b, q },
            ValueFamily::Power { b, t } => ValueFamily::Power { b: c * b, t },
        }
    }

    /// Smallest n >= lo with |f|(n) <= tau, for non-increasing families
    /// that eventually cross. None if no crossing at or after lo.
    fn down_crossing(&self, tau: f64, lo: u64) -> Option<u64> {
        debug_assert!(self.non_increasing());
        match *self {
            ValueFamily::Zero => Some(lo),
            ValueFamily::Constant { b } => {
                if b <= tau {
                    Some(lo)
                } else {
                    None
                }
            }
            ValueFamily::Geometric { b, q } => {
                if q == 1.0 {
                    return if b <= tau { Some(lo) } else { None };
                }
                if b * q.powf(lo as f64) <= tau {
                    return Some(lo);
                }
                // b q^n <= tau  <=>  n >= ln(tau/b)/ln(q)   (ln q < 0)
                let guess = ((tau / b).ln() / q.ln()).ceil();
                Some(scan_crossing(|n| self.magnitude(n) <= tau, guess, lo))
            }
            ValueFamily::Power { b, t } => {
                if t == 0.0 {
                    return if b <= tau { Some(lo) } else { None };
                }
                if b * (lo as f64).powf(-t) <= tau {
                    return Some(lo);
                }
                // b n^-t <= tau  <=>  n >= (b/tau)^(1/t)
                let guess = (b / tau).powf(1.0 / t).ceil();
                Some(scan_crossing(|n| self.magnitude(n) <= tau, guess, lo))
            }
        }
    }

    /// Smallest n >= lo with |f|(n) > tau, for non-decreasing families.
    /// None if the family never exceeds tau.
    fn up_crossing(&self, tau: f64, lo: u64) -> Option<u64> {
        debug_assert!(!self.non_increasing());
        if self.magnitude(lo.max(1)) > tau {
            return Some(lo);
        }
        match *self {
            ValueFamily::Geometric { b, q } => {
                let guess = ((tau / b).ln() / q.ln()).ceil();
                Some(scan_crossing(|n| self.magnitude(n) > tau, guess, lo))
            }
            ValueFamily::Power { b, t } => {
                // t < 0: b n^|t| > tau  <=>  n > (tau/b)^(1/|t|)
                let guess = (tau / b).powf(-1.0 / t).ceil();
                Some(scan_crossing(|n| self.magnitude(n) > tau, guess, lo))
            }
            _ => unreachable!(),
        }
    }

    /// The set {n in [lo, hi) : |f|(n) > tau} as a contiguous range
    /// (monotone families make superlevel sets intervals).
    pub fn superlevel(&self, tau: f64, lo: u64, hi: Option<u64>) -> TailRange {
        debug_assert!(tau > 0.0);
        if self.is_zero() {
            return TailRange::Empty;
        }
        if self.non_increasing() {
            match self.down_crossing(tau, lo) {
                Some(k) if k <= lo => TailRange::Empty,
                Some(k) => match hi {
                    Some(h) => TailRange::bounded(lo, k.min(h)),
                    None => TailRange::bounded(lo, k),
                },
                None => match hi {
                    Some(h) => TailRange::bounded(lo, h),
                    None => TailRange::Unbounded { lo },
                },
            }
        } else {
            match self.up_crossing(tau, lo) {
                Some(k) => {
                    let k = k.max(lo);
                    match hi {
                        Some(h) if k >= h => TailRange::Empty,
                        Some(h) => TailRange::bounded(k, h),
                        None => TailRange::Unbounded { lo: k },
                    }
                }
                None => TailRange::Empty,
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AlpError::Invalid(m.to_string()));
        match *self {
            ValueFamily::Zero => Ok(()),
            ValueFamily::Constant { b } => {
                if !b.is_finite() || b < 0.0 {
                    return bad("constant value family requires finite b >= 0");
                }
                Ok(())
            }
            ValueFamily::Geometric { b, q } => {
                if !b.is_finite() || b < 0.0 {
                    return bad("geometric value family requires finite b >= 0");
                }
                if !q.is_finite() || q <= 0.0 {
                    return bad("geometric value family requires q > 0");
                }
                Ok(())
            }
            ValueFamily::Power { b, t } => {
                if !b.is_finite() || b < 0.0 {
                    return bad("power value family requires finite b >= 0");
                }
                if !t.is_finite() {
                    return bad("power value family requires finite t");
                }
                Ok(())
            }
        }
    }
}

fn scan_crossing<F: Fn(u64) -> bool>(pred: F, guess: f64, lo: u64) -> u64 {
    let mut n = if guess.is_finite() && guess > lo as f64 {
        (guess as u64).saturating_sub(3).max(lo)
    } else {
        lo
    };
    while !pred(n.max(1)) {
        n += 1;
    }
    n.max(lo)
}

/// Contiguous range of tail atom indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRange {
    Empty,
    Bounded { lo: u64, hi: u64 },
    Unbounded { lo: u64 },
}

impl TailRange {
    pub fn bounded(lo: u64, hi: u64) -> TailRange {
        if hi <= lo {
            TailRange::Empty
        } else {
            TailRange::Bounded { lo, hi }
        }
    }
}

/// One tail segment: atoms in [lo, hi) (hi = None for unbounded) where
/// f = sign * family(n). Atoms not covered by any segment carry f = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSegment {
    pub lo: u64,
    pub hi: Option<u64>,
    pub family: ValueFamily,
    #[serde(default = "one")]
    pub sign: i8,
}

fn one() -> i8 {
    1
}

impl TailSegment {
    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && self.hi.map_or(true, |h| n < h)
    }

    /// Intersection of this segment with [lo, hi).
    pub fn clip(&self, lo: u64, hi: Option<u64>) -> Option<TailSegment> {
        let new_lo = self.lo.max(lo);
        let new_hi = match (self.hi, hi) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        if let Some(h) = new_hi {
            if h <= new_lo {
                return None;
            }
        }
        Some(TailSegment {
            lo: new_lo,
            hi: new_hi,
            family: self.family,
            sign: self.sign,
        })
    }
}

/// Piecewise-constant measurable function: one finite value per cell
/// (missing = 0) plus a segmented tail value family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurableFn {
    #[serde(default)]
    pub values: BTreeMap<usize, f64>,
    #[serde(default)]
    pub tail: Vec<TailSegment>,
}

/// Wire format for a function: per-cell values plus one tail family.
#[derive(Debug, Serialize, Deserialize)]
struct FnJson {
    #[serde(default)]
    values: BTreeMap<String, f64>,
    #[serde(default)]
    tail: Option<TailJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TailJson {
    #[serde(flatten)]
    family: ValueFamily,
    #[serde(default = "one")]
    sign: i8,
}

impl MeasurableFn {
    pub fn zero() -> Self {
        MeasurableFn::default()
    }

    pub fn from_values<I: IntoIterator<Item = (usize, f64)>>(values: I) -> Self {
        MeasurableFn {
            values: values.into_iter().filter(|&(_, v)| v != 0.0).collect(),
            tail: Vec::new(),
        }
    }

    /// Function given by one value per cell id 0..n.
    pub fn dense(values: &[f64]) -> Self {
        Self::from_values(values.iter().copied().enumerate())
    }

    pub fn with_tail(mut self, family: ValueFamily, sign: i8) -> Self {
        if !family.is_zero() {
            self.tail.push(TailSegment {
                lo: 1,
                hi: None,
                family,
                sign,
            });
        }
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let parsed: FnJson =
            serde_json::from_str(s).map_err(|e| AlpError::Invalid(format!("function JSON: {e}")))?;
        let mut values = BTreeMap::new();
        for (k, v) in parsed.values {
            let id: usize = k
                .parse()
                .map_err(|_| AlpError::Invalid(format!("bad cell id key '{k}'")))?;
            if !v.is_finite() {
                return Err(AlpError::Invalid(format!(
                    "non-finite value {v} on cell {id}"
                )));
            }
            if v != 0.0 {
                values.insert(id, v);
            }
        }
        let mut tail = Vec::new();
        if let Some(t) = parsed.tail {
            t.family.validate()?;
            if !(t.sign == 1 || t.sign == -1) {
                return Err(AlpError::Invalid("tail sign must be 1 or -1".into()));
            }
            if !t.family.is_zero() {
                tail.push(TailSegment {
                    lo: 1,
                    hi: None,
                    family: t.family,
                    sign: t.sign,
                });
            }
        }
        Ok(MeasurableFn { values, tail })
    }

    pub fn value(&self, id: usize) -> f64 {
        self.values.get(&id).copied().unwrap_or(0.0)
    }

    /// Signed value on tail atom n.
    pub fn tail_value(&self, n: u64) -> f64 {
        for seg in &self.tail {
            if seg.contains(n) {
                return seg.sign as f64 * seg.family.magnitude(n);
            }
        }
        0.0
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(|&v| v == 0.0)
            && self.tail.iter().all(|s| s.family.is_zero())
    }

    pub fn has_tail(&self) -> bool {
        self.tail.iter().any(|s| !s.family.is_zero())
    }

    pub fn abs(&self) -> MeasurableFn {
        MeasurableFn {
            values: self.values.iter().map(|(&k, &v)| (k, v.abs())).collect(),
            tail: self
                .tail
                .iter()
                .map(|s| TailSegment { sign: 1, ..*s })
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> MeasurableFn {
        if c == 0.0 {
            return MeasurableFn::zero();
        }
        MeasurableFn {
            values: self.values.iter().map(|(&k, &v)| (k, c * v)).collect(),
            tail: self
                .tail
                .iter()
                .map(|s| TailSegment {
                    family: s.family.scaled(c.abs()),
                    sign: if c < 0.0 { -s.sign } else { s.sign },
                    ..*s
                })
                .collect(),
        }
    }

    pub fn neg(&self) -> MeasurableFn {
        self.scale(-1.0)
    }

    /// f - g. Tail families must be alignable shape-by-shape; mismatched
    /// shapes on overlapping ranges are not representable.
    pub fn sub(&self, other: &MeasurableFn) -> Result<MeasurableFn> {
        let mut values = self.values.clone();
        for (&k, &v) in &other.values {
            let e = values.entry(k).or_insert(0.0);
            *e -= v;
        }
        values.retain(|_, v| *v != 0.0);

        let tail = sub_tails(&self.tail, &other.tail)?;
        Ok(MeasurableFn { values, tail })
    }

    /// min(|f|, 1), cellwise and segmentwise (crossings split segments).
    pub fn min_one(&self) -> MeasurableFn {
        let values = self
            .values
            .iter()
            .map(|(&k, &v)| (k, v.abs().min(1.0)))
            .collect();
        let mut tail = Vec::new();
        for seg in &self.tail {
            if seg.family.is_zero() {
                continue;
            }
            // region where |f| > 1 becomes constant 1, the rest keeps |f|
            match seg.family.superlevel(1.0, seg.lo, seg.hi) {
                TailRange::Empty => tail.push(TailSegment { sign: 1, ..*seg }),
                TailRange::Bounded { lo, hi } => {
                    tail.push(TailSegment {
                        lo,
                        hi: Some(hi),
                        family: ValueFamily::Constant { b: 1.0 },
                        sign: 1,
                    });
                    // the two complementary pieces keep the family
                    if lo > seg.lo {
                        tail.push(TailSegment {
                            lo: seg.lo,
                            hi: Some(lo),
                            family: seg.family,
                            sign: 1,
                        });
                    }
                    match seg.hi {
                        Some(h) if h > hi => tail.push(TailSegment {
                            lo: hi,
                            hi: Some(h),
                            family: seg.family,
                            sign: 1,
                        }),
                        None => tail.push(TailSegment {
                            lo: hi,
                            hi: None,
                            family: seg.family,
                            sign: 1,
                        }),
                        _ => {}
                    }
                }
                TailRange::Unbounded { lo } => {
                    tail.push(TailSegment {
                        lo,
                        hi: None,
                        family: ValueFamily::Constant { b: 1.0 },
                        sign: 1,
                    });
                    if lo > seg.lo {
                        tail.push(TailSegment {
                            lo: seg.lo,
                            hi: Some(lo),
                            family: seg.family,
                            sign: 1,
                        });
                    }
                }
            }
        }
        tail.sort_by_key(|s| s.lo);
        MeasurableFn { values, tail }
    }

    /// Distinct nonzero magnitudes on cells.
    pub fn distinct_cell_magnitudes(&self) -> Vec<f64> {
        let mut mags: Vec<f64> = self
            .values
            .values()
            .map(|v| v.abs())
            .filter(|&m| m > 0.0)
            .collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        mags.dedup();
        mags
    }
}

/// Pairwise difference of segmented tails.
fn sub_tails(a: &[TailSegment], b: &[TailSegment]) -> Result<Vec<TailSegment>> {
    if b.iter().all(|s| s.family.is_zero()) {
        return Ok(a.to_vec());
    }
    if a.iter().all(|s| s.family.is_zero()) {
        return Ok(b
            .iter()
            .map(|s| TailSegment { sign: -s.sign, ..*s })
            .collect());
    }
    // split at the union of segment boundaries, then subtract piecewise
    let mut bounds: Vec<u64> = Vec::new();
    let mut unbounded = false;
    for s in a.iter().chain(b.iter()) {
        bounds.push(s.lo);
        match s.hi {
            Some(h) => bounds.push(h),
            None => unbounded = true,
        }
    }
    bounds.sort_unstable();
    bounds.dedup();
    let mut out = Vec::new();
    let pieces: Vec<(u64, Option<u64>)> = {
        let mut v = Vec::new();
        for w in bounds.windows(2) {
            v.push((w[0], Some(w[1])));
        }
        if unbounded {
            if let Some(&last) = bounds.last() {
                v.push((last, None));
            }
        }
        v
    };
    for (lo, hi) in pieces {
        let fa = signed_family_on(a, lo);
        let fb = signed_family_on(b, lo);
        if let Some(seg) = sub_signed(fa, fb, lo, hi)? {
            out.push(seg);
        }
    }
    Ok(out)
}

fn signed_family_on(segs: &[TailSegment], n: u64) -> Option<(ValueFamily, i8)> {
    segs.iter()
        .find(|s| s.contains(n))
        .map(|s| (s.family, s.sign))
}

fn sub_signed(
    a: Option<(ValueFamily, i8)>,
    b: Option<(ValueFamily, i8)>,
    lo: u64,
    hi: Option<u64>,
) -> Result<Option<TailSegment>> {
    let make = |family: ValueFamily, sign: i8| {
        if family.is_zero() {
            None
        } else {
            Some(TailSegment { lo, hi, family, sign })
        }
    };
    let coef = |f: ValueFamily, s: i8| -> f64 {
        s as f64
            * match f {
                ValueFamily::Zero => 0.0,
                ValueFamily::Constant { b } => b,
                ValueFamily::Geometric { b, .. } => b,
                ValueFamily::Power { b, .. } => b,
            }
    };
    match (a, b) {
        (None, None) => Ok(None),
        (Some((f, s)), None) => Ok(make(f, s)),
        (None, Some((f, s))) => Ok(make(f, -s)),
        (Some((fa, sa)), Some((fb, sb))) => {
            let c = coef(fa, sa) - coef(fb, sb);
            let sign = if c < 0.0 { -1 } else { 1 };
            let mag = c.abs();
            let family = match (fa, fb) {
                (ValueFamily::Zero, g) | (g, ValueFamily::Zero) => g.scaled(1.0),
                (ValueFamily::Constant { .. }, ValueFamily::Constant { .. }) => {
                    ValueFamily::Constant { b: mag }
                }
                (ValueFamily::Geometric { q: qa, .. }, ValueFamily::Geometric { q: qb, .. })
                    if qa == qb =>
                {
                    ValueFamily::Geometric { b: mag, q: qa }
                }
                (ValueFamily::Power { t: ta, .. }, ValueFamily::Power { t: tb, .. })
                    if ta == tb =>
                {
                    ValueFamily::Power { b: mag, t: ta }
                }
                _ => {
                    return Err(AlpError::UnsupportedFamilyCombination(format!(
                        "cannot subtract tail families {fb:?} from {fa:?}"
                    )))
                }
            };
            let family = match family {
                ValueFamily::Constant { .. } => ValueFamily::Constant { b: mag },
                ValueFamily::Geometric { q, .. } => ValueFamily::Geometric { b: mag, q },
                ValueFamily::Power { t, .. } => ValueFamily::Power { b: mag, t },
                ValueFamily::Zero => ValueFamily::Zero,
            };
            Ok(make(family, sign))
        }
    }
}
