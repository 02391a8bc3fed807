//! Preference dynamics on the unit sphere under biased assimilation:
//! simulation, regret analysis, recommendation policies, eigenvector design
//! for randomized recommendation, and identifiability of initial preferences.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod identification;
pub mod nnls;
pub mod objectives;
pub mod policies;

pub use error::{Error, Result};
pub use geometry::{normalize, symmetric_eig, ItemCatalog, StepSizeSchedule, SymmetricEigResult, UnitVector};
