//! Computational laboratory for the F-space of functions almost in L_p.
//!
//! The space Λ_p collects measurable functions that land in L_p after the
//! removal of a set of arbitrarily small measure. This crate models measure
//! spaces as finite weighted cell partitions with closed-form atomic tails,
//! evaluates the F-norm `‖f‖_{α_p} = ‖min(|f|,1)‖_p` and its companion
//! functionals exactly or with analytic error bounds, decides Λ_p
//! membership, classifies sequence convergence modes (including the Vitali
//! theorem decompositions), builds constructive approximations, and
//! reproduces the named counterexamples of the topology (unbounded balls,
//! non-convexity, the Fréchet pathology).

pub mod approx;
pub mod convergence;
pub mod error;
pub mod functionals;
pub mod gallery;
pub mod measure;
pub mod report;

pub use error::{AlpError, Result};
pub use measure::{Extended, MeasurableFn, MeasurableSet, MeasureSpace, TailFamily, ValueFamily};
