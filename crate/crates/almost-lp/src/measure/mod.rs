//! Measure-space data model and integration engine.

pub mod extended;
pub mod func;
pub mod integrate;
pub mod series;
pub mod space;

pub use extended::Extended;
pub use func::{MeasurableFn, TailRange, TailSegment, ValueFamily};
pub use integrate::{
    integrate_p, integrate_p_complement, integrate_p_whole, integrate_signed,
    integrate_signed_complement, measure_of, pointwise_min_one, support_measure,
    DEFAULT_TAIL_TOL,
};
pub use series::{max_tail_terms, GeoPow};
pub use space::{Cell, ComplementSet, MeasurableSet, MeasureSpace, TailFamily, TailSel};
