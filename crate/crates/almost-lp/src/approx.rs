//! Constructive density: dyadic simple-function ladders, truncation into
//! L_p with certificates, grid mollification, and the dyadic-rational
//! approximation net behind separability.

use serde::{Deserialize, Serialize};

use crate::error::{AlpError, Result};
use crate::functionals::{alpha_norm, lambda_p_member, Membership};
use crate::measure::{
    integrate_p_whole, Cell, MeasurableFn, MeasurableSet, MeasureSpace, TailFamily, TailSegment,
    ValueFamily,
};

/// An axis-aligned box in ℝ^d partitioned into equal divisible cells,
/// mapped to a `MeasureSpace` in row-major order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridBox {
    /// (lo, hi) per axis
    pub bounds: Vec<(f64, f64)>,
    /// cells per axis
    pub cells: Vec<usize>,
}

impl GridBox {
    pub fn new(bounds: Vec<(f64, f64)>, cells: Vec<usize>) -> Result<GridBox> {
        if bounds.is_empty() || bounds.len() > 3 || bounds.len() != cells.len() {
            return Err(AlpError::Invalid(
                "grid needs 1-3 axes with matching bounds and cell counts".into(),
            ));
        }
        for (&(lo, hi), &n) in bounds.iter().zip(&cells) {
            if !(hi > lo) || n == 0 {
                return Err(AlpError::Invalid("degenerate grid axis".into()));
            }
        }
        Ok(GridBox { bounds, cells })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Side length of a cell along each axis.
    pub fn steps(&self) -> Vec<f64> {
        self.bounds
            .iter()
            .zip(&self.cells)
            .map(|(&(lo, hi), &n)| (hi - lo) / n as f64)
            .collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.steps().iter().product()
    }

    pub fn total_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn to_space(&self) -> MeasureSpace {
        let vol = self.cell_volume();
        let cells = (0..self.total_cells())
            .map(|id| Cell {
                id,
                weight: vol,
                divisible: true,
            })
            .collect();
        MeasureSpace::new(cells, TailFamily::None).expect("valid grid space")
    }

    /// Center coordinate of a cell along each axis.
    pub fn center(&self, id: usize) -> Vec<f64> {
        let steps = self.steps();
        let mut rem = id;
        let mut out = vec![0.0; self.dim()];
        // row-major: last axis fastest
        for axis in (0..self.dim()).rev() {
            let i = rem % self.cells[axis];
            rem /= self.cells[axis];
            out[axis] = self.bounds[axis].0 + (i as f64 + 0.5) * steps[axis];
        }
        out
    }

    /// Sample a coordinate function at all cell centers.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.total_cells()).map(|id| f(&self.center(id))).collect()
    }
}

fn dyadic_floor(v: f64, k: u32) -> f64 {
    let scale = 2f64.powi(k as i32);
    let mag = ((v.abs() * scale).floor() / scale).min(k as f64);
    mag.copysign(v)
}

/// Dyadic truncation ladder s_1..s_k with s_j = sign(f)·min(⌊2^j|f|⌋/2^j, j):
/// |s_j| ≤ |f| pointwise and s_j → f.
pub fn simple_ladder(f: &MeasurableFn, k: u32) -> Result<Vec<MeasurableFn>> {
    if k == 0 {
        return Err(AlpError::Invalid("ladder needs k >= 1".into()));
    }
    let mut out = Vec::with_capacity(k as usize);
    for j in 1..=k {
        let values = f
            .values
            .iter()
            .map(|(&id, &v)| (id, dyadic_floor(v, j)))
            .collect();
        let mut tail = Vec::new();
        for seg in &f.tail {
            match seg.family {
                ValueFamily::Zero => {}
                ValueFamily::Constant { b } => {
                    let s = dyadic_floor(b, j);
                    if s != 0.0 {
                        tail.push(TailSegment {
                            family: ValueFamily::Constant { b: s },
                            ..*seg
                        });
                    }
                }
                _ => {
                    return Err(AlpError::UnsupportedFamilyCombination(
                        "simple ladder supports constant tail families only".into(),
                    ))
                }
            }
        }
        out.push(MeasurableFn { values, tail });
    }
    Ok(out)
}

/// g = f χ_{E^c} with μ(E) < ε^p, g ∈ L_p, and ‖f − g‖_{α_p} < ε.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub g: MeasurableFn,
    pub excised: MeasurableSet,
    pub mu_excised: f64,
    pub alpha_dist: f64,
    pub lp_pow_g: f64,
}

const TOL: f64 = 1e-10;

pub fn truncate_to_lp(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    eps: f64,
    tol: f64,
) -> Result<TruncationCertificate> {
    let budget = eps.powf(p);
    let report = lambda_p_member(space, f, p, &[budget], tol)?;
    match report.verdict {
        Membership::Member => {}
        _ => return Err(AlpError::NotMember),
    }
    let excised = report
        .witnesses
        .first()
        .map(|(_, w)| w.clone())
        .unwrap_or_else(MeasurableSet::empty);
    // the witness is either empty or a tail suffix: drop the suffix from f
    let g = match excised.tail_lo(space) {
        None => f.clone(),
        Some(k) => MeasurableFn {
            values: f.values.clone(),
            tail: f.tail.iter().filter_map(|s| s.clip(0, Some(k))).collect(),
        },
    };
    let mu_excised = excised.measure(space, tol)?.value_or_inf();
    let diff = f.sub(&g)?;
    let alpha_dist = alpha_norm(space, &diff, p, tol)?.value_or_inf();
    let lp_pow_g = integrate_p_whole(space, &g, p, tol)?.value_or_inf();
    if !lp_pow_g.is_finite() {
        return Err(AlpError::Invalid("truncation left an infinite integral".into()));
    }
    Ok(TruncationCertificate {
        g,
        excised,
        mu_excised,
        alpha_dist,
        lp_pow_g,
    })
}

/// Normalized polynomial bump kernel (1 − (|x|/h)²)³ sampled on grid
/// offsets of radius h.
fn bump_kernel(grid: &GridBox, h: f64) -> Vec<(Vec<i64>, f64)> {
    let steps = grid.steps();
    let radius: Vec<i64> = steps.iter().map(|&s| (h / s).floor() as i64).collect();
    let mut offsets = vec![vec![0i64; grid.dim()]];
    for axis in 0..grid.dim() {
        let mut next = Vec::new();
        for base in &offsets {
            for o in -radius[axis]..=radius[axis] {
                let mut v = base.clone();
                v[axis] = o;
                next.push(v);
            }
        }
        offsets = next;
    }
    let mut kernel = Vec::new();
    let mut total = 0.0;
    for off in offsets {
        let r2: f64 = off
            .iter()
            .zip(&steps)
            .map(|(&o, &s)| (o as f64 * s).powi(2))
            .sum();
        let u = r2.sqrt() / h;
        if u < 1.0 {
            let w = (1.0 - u * u).powi(3);
            total += w;
            kernel.push((off, w));
        }
    }
    for (_, w) in &mut kernel {
        *w /= total;
    }
    kernel
}

/// Mollification report: the smoothed grid values and the certified
/// α-distance to the input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MollifyReport {
    pub phi: Vec<f64>,
    pub h: f64,
    pub alpha_dist: f64,
    /// largest discrete difference quotient of φ (smoothness witness)
    pub max_slope: f64,
}

/// Discrete convolution of grid values with the bump kernel of radius h
/// (zero padding outside the box).
pub fn mollify(grid: &GridBox, values: &[f64], p: f64, h: f64) -> Result<MollifyReport> {
    if values.len() != grid.total_cells() {
        return Err(AlpError::Invalid("value count does not match the grid".into()));
    }
    let steps = grid.steps();
    if h <= 0.0 || steps.iter().any(|&s| (h / s - (h / s).round()).abs() > 1e-9) {
        return Err(AlpError::Invalid(
            "kernel radius must be a positive multiple of the cell side".into(),
        ));
    }
    let kernel = bump_kernel(grid, h);
    let dims = &grid.cells;
    let d = grid.dim();
    let index_of = |coords: &[i64]| -> Option<usize> {
        let mut id = 0usize;
        for axis in 0..d {
            if coords[axis] < 0 || coords[axis] >= dims[axis] as i64 {
                return None;
            }
            id = id * dims[axis] + coords[axis] as usize;
        }
        Some(id)
    };
    let coords_of = |id: usize| -> Vec<i64> {
        let mut rem = id;
        let mut out = vec![0i64; d];
        for axis in (0..d).rev() {
            out[axis] = (rem % dims[axis]) as i64;
            rem /= dims[axis];
        }
        out
    };
    let mut phi = vec![0.0f64; values.len()];
    for id in 0..values.len() {
        let base = coords_of(id);
        let mut acc = 0.0;
        for (off, w) in &kernel {
            let shifted: Vec<i64> = base.iter().zip(off).map(|(&b, &o)| b + o).collect();
            if let Some(src) = index_of(&shifted) {
                acc += w * values[src];
            }
        }
        phi[id] = acc;
    }
    let space = grid.to_space();
    let diff: Vec<f64> = values.iter().zip(&phi).map(|(a, b)| a - b).collect();
    let alpha_dist = alpha_norm(&space, &MeasurableFn::dense(&diff), p, TOL)?.value_or_inf();
    // smoothness witness: difference quotients along the first axis
    let mut max_slope = 0.0f64;
    let stride: usize = dims[1..].iter().product::<usize>().max(1);
    for id in stride..phi.len() {
        max_slope = max_slope.max((phi[id] - phi[id - stride]).abs() / steps[0]);
    }
    Ok(MollifyReport {
        phi,
        h,
        alpha_dist,
        max_slope,
    })
}

/// Halve h (down to one cell side) until the mollification error drops
/// below eps; reports the best achieved radius or `GridTooCoarse`.
pub fn mollify_within(
    grid: &GridBox,
    values: &[f64],
    p: f64,
    eps: f64,
    h0: f64,
) -> Result<MollifyReport> {
    let min_step = grid
        .steps()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let mut h = h0;
    let mut best: Option<MollifyReport> = None;
    // stop at a two-cell radius: a one-cell kernel degenerates to the
    // identity and certifies nothing
    while h >= 2.0 * min_step - 1e-12 {
        // snap to a multiple of the cell side
        let snapped = (h / min_step).round().max(2.0) * min_step;
        let rep = mollify(grid, values, p, snapped)?;
        let better = best
            .as_ref()
            .map_or(true, |b| rep.alpha_dist < b.alpha_dist);
        if better {
            best = Some(rep);
        }
        if best.as_ref().unwrap().alpha_dist < eps {
            return Ok(best.unwrap());
        }
        h /= 2.0;
    }
    Err(AlpError::GridTooCoarse {
        achieved: best.map(|b| b.alpha_dist).unwrap_or(f64::INFINITY),
        target: eps,
    })
}

/// A member of the countable dyadic net within 2ε of f.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetReport {
    pub g: MeasurableFn,
    /// dyadic resolution 2^-m of the rounded coefficients
    pub resolution: f64,
    pub alpha_dist: f64,
    pub eps: f64,
}

/// Round f to dyadic-rational cell coefficients (and excise a small tail
/// suffix) so that ‖f − g‖_{α_p} ≤ 2ε.
pub fn rational_simple_net(
    space: &MeasureSpace,
    f: &MeasurableFn,
    p: f64,
    eps: f64,
    tol: f64,
) -> Result<NetReport> {
    let truncated = truncate_to_lp(space, f, p, eps, tol)?;
    // cell-uniform rounding error δ gives ‖·‖_α ≤ (μ_fin · δ^p)^{1/p};
    // pick the dyadic resolution that makes this ≤ ε
    let mu_fin = space.finite_part_measure();
    let target = eps / mu_fin.max(1.0).powf(1.0 / p);
    let m = (-target.log2()).ceil().max(0.0) as i32;
    let scale = 2f64.powi(m);
    let values = truncated
        .g
        .values
        .iter()
        .map(|(&id, &v)| (id, (v * scale).round() / scale))
        .filter(|&(_, v)| v != 0.0)
        .collect();
    let g = MeasurableFn {
        values,
        tail: truncated.g.tail.clone(),
    };
    let diff = f.sub(&g)?;
    let alpha_dist = alpha_norm(space, &diff, p, tol)?.value_or_inf();
    Ok(NetReport {
        g,
        resolution: 1.0 / scale,
        alpha_dist,
        eps,
    })
}
