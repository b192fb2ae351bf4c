//! Effective weak convergence of measure sequences.
//!
//! An [`EWLimit`] carries a modulus for every bounded continuous function
//! descriptor; a [`UEWLimit`] computes moduli from compact-open names alone.
//! [`uniformize`] and [`restrict`] convert between the two, and
//! [`limit_measure`] recovers the limit as a computable measure.

mod families;
mod formula;
mod reduction;
mod seq;

pub use families::{
    family_ewlimit, CollapsingUniform, Constant, Family, Mixture, ShiftingAtom, TruncatedLebesgue,
};
pub use formula::Formula;
pub use reduction::{
    limit_measure, polygonal_reduction, polygonal_reduction_within, restrict, tail_bound,
    tail_bound_within, uniformize,
};
pub use seq::{EWLimit, MeasureSeq, UEWLimit};
