use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::extended::Extended;
use super::series::{max_tail_terms, GeoPow};
use crate::error::{AlpError, Result};

/// One cell of the finite weighted partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub weight: f64,
    #[serde(default = "default_true")]
    pub divisible: bool,
}

fn default_true() -> bool {
    true
}

/// Closed-form countable atomic tail extending the finite partition.
/// Atom n (n >= start) has weight w(n) given by the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TailFamily {
    None,
    /// w(n) = a * r^n
    Geometric { a: f64, r: f64, start: u64 },
    /// w(n) = c
    Constant { c: f64, start: u64 },
    /// w(n) = c * n^(-s)
    Power { c: f64, s: f64, start: u64 },
}

impl TailFamily {
    pub fn start(&self) -> Option<u64> {
        match self {
            TailFamily::None => None,
            TailFamily::Geometric { start, .. }
            | TailFamily::Constant { start, .. }
            | TailFamily::Power { start, .. } => Some(*start),
        }
    }

    pub fn atom_weight(&self, n: u64) -> f64 {
        self.weight_geopow().term(n)
    }

    /// Weight family in canonical geometric-power form.
    pub fn weight_geopow(&self) -> GeoPow {
        match *self {
            TailFamily::None => GeoPow::new(0.0, 1.0, 0.0),
            TailFamily::Geometric { a, r, .. } => GeoPow::new(a, r, 0.0),
            TailFamily::Constant { c, .. } => GeoPow::new(c, 1.0, 0.0),
            TailFamily::Power { c, s, .. } => GeoPow::new(c, 1.0, s),
        }
    }

    /// Total mass of atoms n >= k.
    pub fn mass_from(&self, k: u64, tol: f64) -> Result<Extended> {
        match self {
            TailFamily::None => Ok(Extended::ZERO),
            _ => {
                let start = self.start().unwrap();
                self.weight_geopow()
                    .sum_from(k.max(start), tol, max_tail_terms())
            }
        }
    }

    /// Mass of atoms in [lo, hi), clipped to the tail's own range.
    pub fn mass_range(&self, lo: u64, hi: u64, tol: f64) -> Result<Extended> {
        match self {
            TailFamily::None => Ok(Extended::ZERO),
            _ => {
                let start = self.start().unwrap();
                self.weight_geopow()
                    .sum_range(lo.max(start), hi, tol, max_tail_terms())
            }
        }
    }

    /// Does the suffix mass tend to zero (equivalently, is the total mass finite)?
    pub fn mass_finite(&self) -> bool {
        self.weight_geopow().converges()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AlpError::Invalid(m.to_string()));
        match *self {
            TailFamily::None => Ok(()),
            TailFamily::Geometric { a, r, start } => {
                if !a.is_finite() || a <= 0.0 {
                    return bad("geometric tail requires a > 0");
                }
                if !r.is_finite() || r <= 0.0 || r >= 1.0 {
                    return bad("geometric tail requires r in (0,1)");
                }
                if start == 0 {
                    return bad("tail start index must be >= 1");
                }
                Ok(())
            }
            TailFamily::Constant { c, start } => {
                if !c.is_finite() || c <= 0.0 {
                    return bad("constant tail requires c > 0");
                }
                if start == 0 {
                    return bad("tail start index must be >= 1");
                }
                Ok(())
            }
            TailFamily::Power { c, s, start } => {
                if !c.is_finite() || c <= 0.0 {
                    return bad("power tail requires c > 0");
                }
                if !s.is_finite() || s <= 0.0 {
                    return bad("power tail requires s > 0");
                }
                if start == 0 {
                    return bad("tail start index must be >= 1");
                }
                Ok(())
            }
        }
    }
}

/// Finite weighted cell partition, optionally extended by an atomic tail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureSpace {
    pub cells: Vec<Cell>,
    #[serde(default = "tail_none")]
    pub tail: TailFamily,
    #[serde(skip)]
    index: HashMap<usize, usize>,
}

fn tail_none() -> TailFamily {
    TailFamily::None
}

impl MeasureSpace {
    pub fn new(cells: Vec<Cell>, tail: TailFamily) -> Result<Self> {
        let mut space = MeasureSpace {
            cells,
            tail,
            index: HashMap::new(),
        };
        space.validate()?;
        space.rebuild_index();
        Ok(space)
    }

    /// Finite space from a list of (divisible) cell weights, ids 0..n.
    pub fn finite(weights: &[f64]) -> Result<Self> {
        let cells = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Cell {
                id: i,
                weight: w,
                divisible: true,
            })
            .collect();
        Self::new(cells, TailFamily::None)
    }

    /// Finite atomic space (no cell may be subdivided).
    pub fn finite_atomic(weights: &[f64]) -> Result<Self> {
        let cells = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Cell {
                id: i,
                weight: w,
                divisible: false,
            })
            .collect();
        Self::new(cells, TailFamily::None)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut space: MeasureSpace =
            serde_json::from_str(s).map_err(|e| AlpError::Invalid(format!("space JSON: {e}")))?;
        space.validate()?;
        space.rebuild_index();
        Ok(space)
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id, i))
            .collect();
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.cells {
            if !c.weight.is_finite() || c.weight < 0.0 {
                return Err(AlpError::Invalid(format!(
                    "cell {} has invalid weight {}",
                    c.id, c.weight
                )));
            }
            if !seen.insert(c.id) {
                return Err(AlpError::Invalid(format!("duplicate cell id {}", c.id)));
            }
        }
        self.tail.validate()
    }

    pub fn cell(&self, id: usize) -> Option<&Cell> {
        self.index.get(&id).map(|&i| &self.cells[i])
    }

    pub fn has_tail(&self) -> bool {
        !matches!(self.tail, TailFamily::None)
    }

    pub fn finite_part_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.weight).sum()
    }

    pub fn total_measure(&self) -> Extended {
        let finite = Extended::exact(self.finite_part_measure());
        match self.tail.mass_from(0, 1e-12) {
            Ok(tail) => finite.add(tail),
            Err(_) => Extended::Infinite,
        }
    }

    pub fn is_finite_measure(&self) -> bool {
        self.total_measure().is_finite()
    }

    pub fn whole(&self) -> MeasurableSet {
        MeasurableSet {
            finite_part: self.cells.iter().map(|c| c.id).collect(),
            fractions: BTreeMap::new(),
            tail_part: if self.has_tail() {
                TailSel::All
            } else {
                TailSel::None
            },
        }
    }
}

/// Selection of tail atoms in a measurable set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TailSel {
    None,
    All,
    From { k: u64 },
}

/// Measurable set: a cell-id subset (optionally fractional on divisible
/// cells) plus a tail predicate.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MeasurableSet {
    #[serde(default)]
    pub finite_part: BTreeSet<usize>,
    #[serde(default)]
    pub fractions: BTreeMap<usize, f64>,
    #[serde(default = "tailsel_none")]
    pub tail_part: TailSel,
}

fn tailsel_none() -> TailSel {
    TailSel::None
}

impl Default for TailSel {
    fn default() -> Self {
        TailSel::None
    }
}

impl MeasurableSet {
    pub fn empty() -> Self {
        MeasurableSet {
            finite_part: BTreeSet::new(),
            fractions: BTreeMap::new(),
            tail_part: TailSel::None,
        }
    }

    pub fn of_cells<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        MeasurableSet {
            finite_part: ids.into_iter().collect(),
            fractions: BTreeMap::new(),
            tail_part: TailSel::None,
        }
    }

    pub fn tail_from(k: u64) -> Self {
        MeasurableSet {
            finite_part: BTreeSet::new(),
            fractions: BTreeMap::new(),
            tail_part: TailSel::From { k },
        }
    }

    pub fn is_empty(&self) -> bool {
        self.finite_part.is_empty()
            && self.fractions.is_empty()
            && self.tail_part == TailSel::None
    }

    pub fn validate(&self, space: &MeasureSpace) -> Result<()> {
        for id in self.finite_part.iter().chain(self.fractions.keys()) {
            if space.cell(*id).is_none() {
                return Err(AlpError::Invalid(format!("unknown cell id {id} in set")));
            }
        }
        for (&id, &frac) in &self.fractions {
            let cell = space.cell(id).unwrap();
            if !cell.divisible {
                return Err(AlpError::Invalid(format!(
                    "fraction on atomic cell {id}"
                )));
            }
            if !(0.0..=1.0).contains(&frac) {
                return Err(AlpError::Invalid(format!(
                    "fraction {frac} out of [0,1] on cell {id}"
                )));
            }
            if self.finite_part.contains(&id) {
                return Err(AlpError::Invalid(format!(
                    "cell {id} listed both whole and fractional"
                )));
            }
        }
        if let TailSel::From { k } = self.tail_part {
            match space.tail.start() {
                Some(start) if k >= start => {}
                Some(_) => {
                    return Err(AlpError::Invalid(
                        "tail selection starts before the tail's start index".into(),
                    ))
                }
                None => {
                    return Err(AlpError::Invalid(
                        "tail selection on a space without a tail".into(),
                    ))
                }
            }
        }
        if self.tail_part == TailSel::All && !space.has_tail() {
            // selecting "all" of an absent tail selects nothing; allowed
        }
        // effective fraction of each whole cell is 1.0
        Ok(())
    }

    /// Fraction of cell `id` contained in this set.
    pub fn fraction_of(&self, id: usize) -> f64 {
        if self.finite_part.contains(&id) {
            1.0
        } else {
            self.fractions.get(&id).copied().unwrap_or(0.0)
        }
    }

    pub fn tail_lo(&self, space: &MeasureSpace) -> Option<u64> {
        match (self.tail_part, space.tail.start()) {
            (TailSel::None, _) => None,
            (_, None) => None,
            (TailSel::All, Some(start)) => Some(start),
            (TailSel::From { k }, Some(start)) => Some(k.max(start)),
        }
    }

    pub fn measure(&self, space: &MeasureSpace, tol: f64) -> Result<Extended> {
        let mut finite = 0.0;
        for &id in &self.finite_part {
            finite += space
                .cell(id)
                .ok_or_else(|| AlpError::Invalid(format!("unknown cell id {id}")))?
                .weight;
        }
        for (&id, &frac) in &self.fractions {
            finite += frac
                * space
                    .cell(id)
                    .ok_or_else(|| AlpError::Invalid(format!("unknown cell id {id}")))?
                    .weight;
        }
        let tail = match self.tail_lo(space) {
            Some(lo) => space.tail.mass_from(lo, tol)?,
            None => Extended::ZERO,
        };
        Ok(Extended::exact(finite).add(tail))
    }

    /// Complement within the space. Fractional parts complement cellwise;
    /// a `From(k)` tail selection complements to the head `[start, k)`,
    /// which is returned as explicit head range via `TailSel::None` plus
    /// the caller-visible `head` range in `complement_with_head`.
    pub fn complement(&self, space: &MeasureSpace) -> ComplementSet {
        let mut finite = BTreeSet::new();
        let mut fractions = BTreeMap::new();
        for c in &space.cells {
            let f = self.fraction_of(c.id);
            if f == 0.0 {
                finite.insert(c.id);
            } else if f < 1.0 {
                fractions.insert(c.id, 1.0 - f);
            }
        }
        let (tail_part, tail_head) = match (self.tail_part, space.tail.start()) {
            (TailSel::None, Some(_)) => (TailSel::All, None),
            (TailSel::All, _) | (TailSel::None, None) | (TailSel::From { .. }, None) => {
                (TailSel::None, None)
            }
            (TailSel::From { k }, Some(start)) => (TailSel::None, Some((start, k.max(start)))),
        };
        ComplementSet {
            set: MeasurableSet {
                finite_part: finite,
                fractions,
                tail_part,
            },
            tail_head,
        }
    }
}

/// Complement of a measurable set. The tail head `[lo, hi)` cannot be
/// expressed by `TailSel` alone and is carried separately.
#[derive(Debug, Clone)]
pub struct ComplementSet {
    pub set: MeasurableSet,
    /// Range of tail atoms [lo, hi) included in the complement.
    pub tail_head: Option<(u64, u64)>,
}
