//! Linear sampling: Tikhonov-regularized far-field equations solved through a
//! single shared SVD, with pluggable choices of the regularization parameter.

mod field;
mod grid;
mod indicator;
mod svd;
mod tikhonov;

pub use field::{IndicatorField, Provenance, RegField};
pub use grid::SamplingGrid;
pub use indicator::{lsm_indicator, lsm_indicator_from_svd, lsm_indicator_with, LsmOutput, Strategy};
pub use svd::{singular_values, svd, SvdTriple};
pub use tikhonov::{discrepancy, morozov_alpha, testfunction_rhs, tikhonov_solve, MOROZOV_MAX_ITER, MOROZOV_TOLERANCE};
